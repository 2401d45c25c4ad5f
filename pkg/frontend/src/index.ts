#!/usr/bin/env node
import * as fs from "fs";
import * as path from "path";

import { loadChecked, SchemaError } from "./csv";
import { DEFAULT_JOB, FigureJob, renderHeatmap, renderScaling, renderTail } from "./figures";

export interface CliArgs {
  kind: string;
  input: string;
  output: string;
  job: FigureJob;
}

export function parseArgs(argv: string[]): CliArgs {
  const job: FigureJob = { ...DEFAULT_JOB };
  let kind = "";
  let input = "";
  let output = "";
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) throw new Error(`missing value for ${arg}`);
      return argv[i];
    };
    switch (arg) {
      case "--kind":
        kind = next();
        break;
      case "--in":
        input = next();
        break;
      case "--out":
        output = next();
        break;
      case "--tau":
        job.tau = Number(next());
        break;
      case "--width":
        job.width = Number(next());
        break;
      case "--energy":
        job.energyOffset = Number(next());
        break;
      case "--overlay":
        job.overlay = true;
        break;
      default:
        throw new Error(`unknown argument ${arg}`);
    }
  }
  if (!kind || !input || !output) {
    throw new Error("usage: dysonfig --kind {heatmap|scaling|tail} --in CSV --out PNG [--tau TAU --width W --overlay]");
  }
  job.kind = kind as FigureJob["kind"];
  return { kind, input, output, job };
}

export function render(args: CliArgs): Buffer {
  const table = loadChecked(args.input, args.kind);
  switch (args.kind) {
    case "heatmap":
      return renderHeatmap(table, args.job).toPng();
    case "scaling":
      return renderScaling(table).toPng();
    case "tail":
      return renderTail(table).toPng();
    default:
      throw new Error(`unknown figure kind "${args.kind}"`);
  }
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    const png = render(args);
    fs.mkdirSync(path.dirname(path.resolve(args.output)), { recursive: true });
    fs.writeFileSync(args.output, png);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema mismatch: offending header "${err.offendingHeader}"\n`);
      return 2;
    }
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
