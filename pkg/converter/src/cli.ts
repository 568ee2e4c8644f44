#!/usr/bin/env node
/** CLI: convert an archive export into the canonical corpus layout.
 *
 *   imu-dataset-converter convert <archive.json> <out_dir> [--no-verify]
 *   imu-dataset-converter stats <archive.json>
 *
 * Exit codes: 0 success, 1 usage error, 2 data/schema/statistics error.
 */

import * as fs from "node:fs";

import { convertDataset } from "./convert.js";
import { parseArchive } from "./schema.js";
import { computeStats } from "./stats.js";

function usage(): void {
  process.stderr.write(
    "usage: imu-dataset-converter convert <archive.json> <out_dir> [--no-verify]\n" +
    "       imu-dataset-converter stats <archive.json>\n",
  );
}

export function main(argv: string[]): number {
  const args = argv.filter((a) => a !== "--no-verify");
  const noVerify = argv.includes("--no-verify");
  const command = args[0];
  try {
    if (command === "convert" && args.length === 3) {
      const manifest = convertDataset(args[1], args[2], {
        verifyAgainst: noVerify ? null : undefined,
      });
      const s = manifest.stats;
      process.stdout.write(
        `${manifest.dataset}: ${s.sessions} sessions, ${s.subjects} subjects, ` +
        `${s.bites} bites, ${s.meals} meals, ${s.totalHours.toFixed(2)} h\n`,
      );
      return 0;
    }
    if (command === "stats" && args.length === 2) {
      const archive = parseArchive(JSON.parse(fs.readFileSync(args[1], "utf-8")));
      process.stdout.write(JSON.stringify(computeStats(archive), null, 2) + "\n");
      return 0;
    }
    usage();
    return 1;
  } catch (err) {
    process.stderr.write(`imu-dataset-converter: ${(err as Error).message}\n`);
    return 2;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
