#!/usr/bin/env node
/**
 * pmrsim-plots render --csv <sweep.csv> --metric ber|fer
 *                     [--group decoder,i_max,mismatch_db] [--title T]
 *                     --out <figure.svg>
 *
 * Reads a pmrsim sweep CSV (never modified) and writes one SVG figure
 * with a log-scale error-rate axis, one curve per group.
 */

import { readFileSync, writeFileSync } from "fs";
import { parseSweepCsv, CsvError } from "./csv";
import { renderSvg, CurveSpec, GroupKey, Metric } from "./render";

const GROUP_KEYS: GroupKey[] = ["decoder", "i_max", "mismatch_db"];

interface Args {
  csv: string;
  metric: Metric;
  group: GroupKey[];
  out: string;
  title?: string;
}

function usage(): never {
  process.stderr.write(
    "usage: pmrsim-plots render --csv <path> --metric ber|fer " +
      "[--group decoder,i_max,mismatch_db] [--title T] --out <path.svg>\n"
  );
  process.exit(1);
}

export function parseArgs(argv: string[]): Args {
  if (argv.length === 0 || argv[0] !== "render") usage();
  const flags = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) usage();
    flags.set(argv[i].slice(2), argv[i + 1]);
  }
  const csv = flags.get("csv");
  const out = flags.get("out");
  const metric = flags.get("metric") ?? "ber";
  if (!csv || !out) usage();
  if (metric !== "ber" && metric !== "fer") {
    process.stderr.write(`unknown metric "${metric}"; expected ber or fer\n`);
    process.exit(1);
  }
  const groupRaw = flags.get("group") ?? "decoder,i_max,mismatch_db";
  const group = groupRaw.split(",").map((g) => g.trim()) as GroupKey[];
  for (const g of group) {
    if (!GROUP_KEYS.includes(g)) {
      process.stderr.write(
        `unknown group key "${g}"; expected a subset of ${GROUP_KEYS.join(",")}\n`
      );
      process.exit(1);
    }
  }
  return { csv, metric, group, out, title: flags.get("title") };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch {
    return 1;
  }
  try {
    const text = readFileSync(args.csv, "utf-8");
    const rows = parseSweepCsv(text);
    const spec: CurveSpec = {
      metric: args.metric,
      groupBy: args.group,
      title: args.title,
    };
    const result = renderSvg(rows, spec);
    for (const w of result.warnings) {
      process.stderr.write(`warning: ${w}\n`);
    }
    if (!args.out.endsWith(".svg")) {
      process.stderr.write(
        `note: output is SVG markup regardless of the ${args.out} extension\n`
      );
    }
    writeFileSync(args.out, result.svg, "utf-8");
    process.stdout.write(
      `${args.out}: ${result.curves.length} curve(s), metric=${args.metric}\n`
    );
    return 0;
  } catch (err) {
    if (err instanceof CsvError) {
      process.stderr.write(`csv error: ${err.message}\n`);
    } else {
      process.stderr.write(`error: ${(err as Error).message}\n`);
    }
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
