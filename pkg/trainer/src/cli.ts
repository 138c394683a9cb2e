#!/usr/bin/env node
/** Trainer command line.
 *
 *   train --seed N --epochs N --out-model path --out-data path
 *         [--out-data-100 path] [--data-dir dir] [--batch N]
 *         [--limit-train N]
 *
 * Exports the trained BNN (with recorded deployed accuracy in the
 * metadata) and the binarized test dataset(s) in the simulator's formats.
 */

import { INPUT_BITS } from "./preprocess";
import { train } from "./train";
import { writeBnnModel, writeDataset } from "./modelfile";

interface Args {
  [key: string]: string;
}

function parseArgs(argv: string[]): { command: string; args: Args } {
  if (argv.length === 0) throw new Error("usage: cli <train> [--flag value ...]");
  const command = argv[0];
  const args: Args = {};
  for (let i = 1; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed flag near ${argv[i]}`);
    }
    args[argv[i].slice(2)] = argv[i + 1];
  }
  return { command, args };
}

function main(): number {
  const { command, args } = parseArgs(process.argv.slice(2));
  if (command !== "train") {
    console.error(`unknown command ${command}; only 'train' is supported`);
    return 2;
  }
  const outModel = args["out-model"];
  const outData = args["out-data"];
  if (!outModel || !outData) {
    console.error("--out-model and --out-data are required");
    return 2;
  }
  const seed = Number(args["seed"] ?? 0);
  const epochs = Number(args["epochs"] ?? 24);
  const batch = Number(args["batch"] ?? 100);

  const result = train({
    seed,
    epochs,
    batchSize: batch,
    dataDir: args["data-dir"] ?? "../data/mnist",
    limitTrain: args["limit-train"] ? Number(args["limit-train"]) : undefined,
  });

  writeBnnModel(outModel, result.folded, {
    source: "esam-trainer 0.1.0",
    trainer_seed: seed,
    epochs,
    batch_size: batch,
    preprocessing: "corner-crop-2x2;binarize>0.5",
    recorded_accuracy: result.accuracy,
  });
  console.log(`wrote ${outModel}`);

  writeDataset(outData, result.testBits, result.testLabels,
               result.testCount, INPUT_BITS);
  console.log(`wrote ${outData}`);

  const out100 = args["out-data-100"];
  if (out100) {
    const n = Math.min(100, result.testCount);
    writeDataset(out100, result.testBits.subarray(0, n * INPUT_BITS),
                 result.testLabels.subarray(0, n), n, INPUT_BITS);
    console.log(`wrote ${out100}`);
  }
  return 0;
}

process.exitCode = main();
