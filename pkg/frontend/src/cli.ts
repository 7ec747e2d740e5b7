#!/usr/bin/env node
/**
 * wincuckoo-plots: render experiment CSVs into SVG/PNG figures.
 *
 *   wincuckoo-plots render --kind walk-hist --input bins.csv --out fig
 *   wincuckoo-plots render-all --input results/ --out figures/
 */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { FIGURE_KINDS, FigureKind } from "./figures.js";
import { renderAll, renderFigure } from "./render.js";

async function main(): Promise<void> {
  await yargs(hideBin(process.argv))
    .command(
      "render",
      "render one CSV into one figure",
      (y) =>
        y
          .option("kind", { choices: FIGURE_KINDS, demandOption: true })
          .option("input", { type: "string", demandOption: true, describe: "experiment CSV" })
          .option("out", { type: "string", demandOption: true, describe: "output base path (no extension)" })
          .option("width", { type: "number", default: 960 })
          .option("height", { type: "number", default: 420 })
          .option("png", { type: "boolean", default: true, describe: "also write a PNG next to the SVG" }),
      (argv) => {
        const result = renderFigure(argv.kind as FigureKind, argv.input, argv.out, {
          width: argv.width,
          height: argv.height,
          png: argv.png,
        });
        console.log(`wrote ${result.svgPath}${result.pngPath ? ` and ${result.pngPath}` : ""}`);
      }
    )
    .command(
      "render-all",
      "discover experiment CSVs in a directory and render each",
      (y) =>
        y
          .option("input", { type: "string", demandOption: true, describe: "directory of CSVs" })
          .option("out", { type: "string", demandOption: true, describe: "output directory" })
          .option("png", { type: "boolean", default: true }),
      (argv) => {
        const summary = renderAll(argv.input, argv.out, { png: argv.png });
        for (const r of summary.rendered) {
          console.log(`rendered ${r.kind}: ${r.svgPath}`);
        }
        for (const s of summary.skipped) {
          console.log(`skipped ${s.file}: ${s.reason}`);
        }
        console.log(`${summary.rendered.length} rendered, ${summary.skipped.length} skipped`);
      }
    )
    .demandCommand(1)
    .strict()
    .help()
    .parseAsync();
}

main().catch((err) => {
  console.error(err instanceof Error ? err.message : err);
  process.exit(1);
});
