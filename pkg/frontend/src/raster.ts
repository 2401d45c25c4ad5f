import { PNG } from "pngjs";

/** Fixed-size RGB raster with deterministic PNG encoding (no timestamps). */
export class Raster {
  readonly data: Uint8Array;

  constructor(readonly width: number, readonly height: number, fill = 255) {
    this.data = new Uint8Array(width * height * 3).fill(fill);
  }

  set(x: number, y: number, r: number, g: number, b: number): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 3;
    this.data[i] = r;
    this.data[i + 1] = g;
    this.data[i + 2] = b;
  }

  gray(x: number, y: number, v: number): void {
    const c = Math.max(0, Math.min(255, Math.round(v)));
    this.set(x, y, c, c, c);
  }

  line(x0: number, y0: number, x1: number, y1: number, r = 0, g = 0, b = 0): void {
    // Bresenham on integer endpoints
    let [cx, cy] = [Math.round(x0), Math.round(y0)];
    const [tx, ty] = [Math.round(x1), Math.round(y1)];
    const dx = Math.abs(tx - cx);
    const dy = -Math.abs(ty - cy);
    const sx = cx < tx ? 1 : -1;
    const sy = cy < ty ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(cx, cy, r, g, b);
      if (cx === tx && cy === ty) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        cx += sx;
      }
      if (e2 <= dx) {
        err += dx;
        cy += sy;
      }
    }
  }

  square(x: number, y: number, half: number, r = 0, g = 0, b = 0): void {
    for (let i = -half; i <= half; i++) {
      for (let j = -half; j <= half; j++) {
        this.set(x + i, y + j, r, g, b);
      }
    }
  }

  text(x: number, y: number, s: string): void {
    let cx = x;
    for (const ch of s) {
      const glyph = FONT[ch];
      if (glyph) {
        for (let row = 0; row < 5; row++) {
          for (let col = 0; col < 3; col++) {
            if (glyph[row] & (4 >> col)) this.set(cx + col, y + row, 0, 0, 0);
          }
        }
      }
      cx += 4;
    }
  }

  toPng(): Buffer {
    const png = new PNG({ width: this.width, height: this.height, colorType: 2 });
    for (let i = 0; i < this.width * this.height; i++) {
      png.data[4 * i] = this.data[3 * i];
      png.data[4 * i + 1] = this.data[3 * i + 1];
      png.data[4 * i + 2] = this.data[3 * i + 2];
      png.data[4 * i + 3] = 255;
    }
    return PNG.sync.write(png, { colorType: 2 });
  }
}

// 3x5 glyphs, rows top to bottom, 3-bit masks
const FONT: Record<string, number[]> = {
  "0": [7, 5, 5, 5, 7],
  "1": [2, 6, 2, 2, 7],
  "2": [7, 1, 7, 4, 7],
  "3": [7, 1, 7, 1, 7],
  "4": [5, 5, 7, 1, 1],
  "5": [7, 4, 7, 1, 7],
  "6": [7, 4, 7, 5, 7],
  "7": [7, 1, 2, 2, 2],
  "8": [7, 5, 7, 5, 7],
  "9": [7, 5, 7, 1, 7],
  ".": [0, 0, 0, 0, 2],
  "-": [0, 0, 7, 0, 0],
  "=": [0, 7, 0, 7, 0],
  s: [3, 4, 2, 1, 6],
  e: [7, 5, 7, 4, 7],
  " ": [0, 0, 0, 0, 0],
};
