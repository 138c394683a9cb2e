/** Training loop: MNIST ingestion, STE optimization, deployed evaluation.
 *
 * The recipe (the architecture's training procedure is not prescribed
 * anywhere, so it is fixed here and judged by the exported accuracy):
 * Adam on latent weights and batch-norm affines, batch 100, lr 0.003
 * decayed x0.88 per epoch, straight-through gradients with [-1,1]
 * clipping, inputs binarized exactly as deployed.  Fully deterministic
 * for a fixed seed.
 */

import * as fs from "fs";
import * as path from "path";

import {
  deployedAccuracy,
  finalizeBnStats,
  foldModel,
  initModel,
  trainBatch,
  FoldedLayer,
  Model,
} from "./bnn";
import { readIdxImages, readIdxLabels } from "./idx";
import { INPUT_BITS, preprocessAll } from "./preprocess";
import { mulberry32, shuffle } from "./rng";

export const TOPOLOGY = [768, 256, 256, 256, 10];

export interface TrainOptions {
  seed: number;
  epochs: number;
  batchSize: number;
  dataDir: string;
  limitTrain?: number;
  baseLr?: number;
  lrDecay?: number;
  quiet?: boolean;
}

export interface TrainResult {
  model: Model;
  folded: FoldedLayer[];
  /** deployed-rule accuracy on the full test set */
  accuracy: number;
  testBits: Uint8Array;
  testLabels: Uint8Array;
  testCount: number;
}

function findIdx(dir: string, stem: string): string {
  for (const name of [`${stem}.gz`, stem]) {
    const p = path.join(dir, name);
    if (fs.existsSync(p)) return p;
  }
  throw new Error(`cannot find ${stem}[.gz] under ${dir}`);
}

export interface Dataset {
  bits: Uint8Array;
  labels: Uint8Array;
  count: number;
}

export function loadSplit(dataDir: string, split: "train" | "t10k"): Dataset {
  const images = readIdxImages(findIdx(dataDir, `${split}-images-idx3-ubyte`));
  const labels = readIdxLabels(findIdx(dataDir, `${split}-labels-idx1-ubyte`));
  if (images.count !== labels.length) {
    throw new Error(`${split}: ${images.count} images vs ${labels.length} labels`);
  }
  return {
    bits: preprocessAll(images.pixels, images.count),
    labels: Uint8Array.from(labels),
    count: images.count,
  };
}

export function train(opts: TrainOptions): TrainResult {
  const log = opts.quiet ? () => undefined : console.log;
  const trainSet = loadSplit(opts.dataDir, "train");
  const testSet = loadSplit(opts.dataDir, "t10k");
  const nTrain = Math.min(opts.limitTrain ?? trainSet.count, trainSet.count);
  log(`training on ${nTrain} samples, evaluating on ${testSet.count}`);

  const rng = mulberry32(opts.seed);
  const model = initModel(TOPOLOGY, rng);
  const baseLr = opts.baseLr ?? 0.003;
  const lrDecay = opts.lrDecay ?? 0.88;
  const batch = opts.batchSize;

  const order = new Int32Array(nTrain);
  for (let i = 0; i < nTrain; i++) order[i] = i;
  const xhat = new Float64Array(batch * INPUT_BITS);
  const labels = new Uint8Array(batch);

  let step = 0;
  for (let epoch = 0; epoch < opts.epochs; epoch++) {
    shuffle(rng, order);
    const lr = baseLr * Math.pow(lrDecay, epoch);
    let loss = 0;
    let correct = 0;
    let batches = 0;
    for (let start = 0; start + batch <= nTrain; start += batch) {
      for (let b = 0; b < batch; b++) {
        const s = order[start + b];
        const base = s * INPUT_BITS;
        for (let k = 0; k < INPUT_BITS; k++) {
          xhat[b * INPUT_BITS + k] = trainSet.bits[base + k] ? 1 : -1;
        }
        labels[b] = trainSet.labels[s];
      }
      step++;
      const res = trainBatch(model, xhat, labels, batch, lr, step);
      loss += res.loss;
      correct += res.correct;
      batches++;
    }
    const evalCount = Math.min(2000, testSet.count);
    const evalAcc = deployedAccuracy(foldModel(model), testSet.bits,
                                     testSet.labels, evalCount, INPUT_BITS);
    log(`epoch ${String(epoch + 1).padStart(2)}/${opts.epochs}  lr ${lr.toFixed(5)}  `
      + `loss ${(loss / batches).toFixed(4)}  train-acc ${(correct / (batches * batch)).toFixed(4)}  `
      + `test-acc[${evalCount}] ${evalAcc.toFixed(4)}`);
  }

  log("finalizing batch-norm statistics over the training set");
  finalizeBnStats(model, trainSet.bits, nTrain, INPUT_BITS);
  const folded = foldModel(model);
  const accuracy = deployedAccuracy(folded, testSet.bits, testSet.labels,
                                    testSet.count, INPUT_BITS);
  log(`final deployed test accuracy: ${accuracy.toFixed(4)}`);
  return {
    model,
    folded,
    accuracy,
    testBits: testSet.bits,
    testLabels: testSet.labels,
    testCount: testSet.count,
  };
}
