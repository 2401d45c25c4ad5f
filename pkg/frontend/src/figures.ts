import { Table } from "./csv";
import { Raster } from "./raster";

export interface FigureJob {
  kind: "heatmap" | "scaling" | "tail";
  tau: number;
  width: number;
  overlay: boolean;
  energyOffset: number;
}

export const DEFAULT_JOB: FigureJob = {
  kind: "heatmap",
  tau: 4 * Math.PI,
  width: 0.05,
  overlay: false,
  energyOffset: 0,
};

/** Side length implied by an N^d-row frequency table. */
function sideLength(rows: number[][]): number {
  const n = Math.round(Math.sqrt(rows.length));
  if (n * n !== rows.length) {
    throw new Error(`heatmap expects N^2 rows, got ${rows.length}`);
  }
  return n;
}

/**
 * Figure-1 style heatmap: |psi_hat|^2 over [-1/2, 1/2)^2, darker = larger,
 * gamma 0.5, centered coordinates k = ((m + N/2) mod N)/N - 1/2.  The overlay
 * marks multiplier level sets 2cos(2 pi kx) + 2cos(2 pi ky) on the
 * (2 pi / tau) Z grid shifted by the target quasienergy.
 */
export function renderHeatmap(table: Table, job: FigureJob): Raster {
  const N = sideLength(table.rows);
  const img = new Raster(N, N);
  let maxMag = 0;
  for (const [, , mag] of table.rows) {
    if (mag > maxMag) maxMag = mag;
  }
  const scale = maxMag > 0 ? 1 / maxMag : 0;
  for (const [mx, my, mag] of table.rows) {
    const x = (((mx | 0) + (N >> 1)) % N + N) % N;
    const y = (((my | 0) + (N >> 1)) % N + N) % N;
    const v = Math.sqrt(Math.max(mag * scale, 0)); // gamma 0.5
    img.gray(x, N - 1 - y, 255 * (1 - v));
  }
  if (job.overlay) {
    const spacing = (2 * Math.PI) / job.tau;
    for (let x = 0; x < N; x++) {
      const kx = x / N - 0.5;
      for (let y = 0; y < N; y++) {
        const ky = (N - 1 - y) / N - 0.5;
        const mult = 2 * Math.cos(2 * Math.PI * kx) + 2 * Math.cos(2 * Math.PI * ky);
        const r = (((mult - job.energyOffset) % spacing) + spacing) % spacing;
        const dist = Math.min(r, spacing - r);
        if (dist <= job.width / 2) {
          const i = (y * N + x) * 3;
          img.set(x, y, 220, Math.round(img.data[i + 1] * 0.35), Math.round(img.data[i + 2] * 0.35));
        }
      }
    }
  }
  return img;
}

function olsLogLog(xs: number[], ys: number[]): { slope: number; intercept: number } {
  const lx = xs.map(Math.log);
  const ly = ys.map(Math.log);
  const n = lx.length;
  const mx = lx.reduce((a, b) => a + b, 0) / n;
  const my = ly.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (lx[i] - mx) ** 2;
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const slope = sxy / sxx;
  return { slope, intercept: my - slope * mx };
}

function median(xs: number[]): number {
  const s = [...xs].sort((a, b) => a - b);
  const m = s.length >> 1;
  return s.length % 2 ? s[m] : 0.5 * (s[m - 1] + s[m]);
}

const W = 480;
const H = 360;
const M = 40; // margin

function frame(img: Raster): void {
  img.line(M, H - M, W - M, H - M);
  img.line(M, M, M, H - M);
  img.line(W - M, M, W - M, H - M, 200, 200, 200);
  img.line(M, M, W - M, M, 200, 200, 200);
}

/** Log-log medians of norm_T1 against t with the fitted slope drawn and labeled. */
export function renderScaling(table: Table): Raster {
  const byT = new Map<number, number[]>();
  for (const [, t, norm] of table.rows) {
    if (!byT.has(t)) byT.set(t, []);
    byT.get(t)!.push(norm);
  }
  const ts = [...byT.keys()].sort((a, b) => a - b);
  const meds = ts.map((t) => median(byT.get(t)!));
  if (ts.length < 2) {
    throw new Error("scaling figure needs at least two distinct t values");
  }
  const { slope, intercept } = olsLogLog(ts, meds);

  const img = new Raster(W, H);
  frame(img);
  const lx = ts.map(Math.log);
  const ly = meds.map(Math.log);
  const x0 = Math.min(...lx);
  const x1 = Math.max(...lx);
  const y0 = Math.min(...ly);
  const y1 = Math.max(...ly);
  const padY = 0.1 * (y1 - y0 || 1);
  const toX = (v: number) => M + ((v - x0) / (x1 - x0 || 1)) * (W - 2 * M);
  const toY = (v: number) => H - M - ((v - (y0 - padY)) / (y1 + padY - (y0 - padY))) * (H - 2 * M);
  img.line(toX(x0), toY(intercept + slope * x0), toX(x1), toY(intercept + slope * x1), 120, 120, 220);
  for (let i = 0; i < lx.length; i++) {
    img.square(Math.round(toX(lx[i])), Math.round(toY(ly[i])), 2);
  }
  img.text(M + 6, M + 6, `s=${slope.toFixed(3)}`);
  return img;
}

/** Empirical exceedance of ||X||/sigma on a log scale against the K^2/10 bound. */
export function renderTail(table: Table): Raster {
  const ks = table.rows.map((r) => r[1] / r[2]).sort((a, b) => a - b);
  const n = ks.length;
  if (n < 2) {
    throw new Error("tail figure needs at least two trials");
  }
  const img = new Raster(W, H);
  frame(img);
  const kMax = ks[n - 1] * 1.05;
  const logFloor = Math.log(1 / n) - 1;
  const toX = (k: number) => M + (k / kMax) * (W - 2 * M);
  const toY = (logp: number) => M + ((0 - logp) / (0 - logFloor)) * (H - 2 * M);
  // survival curve
  for (let i = 0; i < n; i++) {
    const p = (n - i) / n;
    img.square(Math.round(toX(ks[i])), Math.round(toY(Math.log(p))), 1);
  }
  // exp(-K^2/10) reference
  let prev: [number, number] | null = null;
  for (let px = 0; px <= 200; px++) {
    const k = (px / 200) * kMax;
    const logp = -(k * k) / 10;
    if (logp < logFloor) break;
    const pt: [number, number] = [toX(k), toY(logp)];
    if (prev) img.line(prev[0], prev[1], pt[0], pt[1], 120, 120, 220);
    prev = pt;
  }
  img.text(M + 6, M + 6, `e=-0.1`);
  return img;
}
