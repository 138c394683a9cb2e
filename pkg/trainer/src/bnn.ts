/** Sign-activation binary network: training, folding, deployed evaluation.
 *
 * Training keeps latent float weights per layer; the forward pass binarizes
 * them with sign (sign(0) = +1) and uses {-1,+1} activations.  Hidden
 * layers carry per-neuron batch normalization; gradients flow through both
 * binarizations with the straight-through estimator (pass-through inside
 * [-1, 1], zero outside), and latent weights are clipped to [-1, 1].
 *
 * The output layer is bias-free and is scored in the spike-count domain:
 *
 *     S_j = sum over spiking inputs of w_kj = (x W + 1W) / 2,  x in {-1,+1}
 *
 * which is exactly the membrane potential the deployed hardware
 * accumulates, so argmax(S) is the true deployed decision rule and softmax
 * training optimizes precisely that rule (logits = S / TAU).
 *
 * At export, batch norm folds exactly into per-neuron biases: with
 * s = sqrt(var + eps), the fire condition gamma*(u - mu)/s + beta >= 0
 * becomes u + (beta*s/gamma - mu) >= 0 for gamma > 0, and for gamma < 0 the
 * neuron's weight column is negated with bias mu - beta*s/gamma.  The
 * folded network is a plain {+-1 weights, real biases} BNN.
 */

import { matmul, matmulBT, matmulTA } from "./matrix";
import { Rng, uniform } from "./rng";

export const TAU = 8; // shared softmax temperature; per-class scales would break argmax parity
const BN_EPS = 1e-5;
const BN_MOMENTUM = 0.9;
const ADAM_B1 = 0.9;
const ADAM_B2 = 0.999;
const ADAM_EPS = 1e-8;

export interface AdamState {
  m: Float64Array;
  v: Float64Array;
}

export interface Layer {
  rows: number;
  cols: number;
  latent: Float64Array; // rows x cols
  adamW: AdamState;
  // batch norm (hidden layers only)
  isOutput: boolean;
  gamma: Float64Array;
  beta: Float64Array;
  runMean: Float64Array;
  runVar: Float64Array;
  adamGamma: AdamState;
  adamBeta: AdamState;
}

export interface Model {
  topology: number[];
  layers: Layer[];
}

export interface FoldedLayer {
  rows: number;
  cols: number;
  /** +-1 weights, row-major rows x cols */
  weights: Float64Array;
  /** per-neuron bias; all-zero for the output layer */
  biases: Float64Array;
}

const adam = (size: number): AdamState => ({
  m: new Float64Array(size),
  v: new Float64Array(size),
});

export function initModel(topology: number[], rng: Rng): Model {
  const layers: Layer[] = [];
  for (let l = 0; l + 1 < topology.length; l++) {
    const rows = topology[l];
    const cols = topology[l + 1];
    const latent = new Float64Array(rows * cols);
    const limit = Math.sqrt(6 / (rows + cols));
    for (let i = 0; i < latent.length; i++) latent[i] = uniform(rng, -limit, limit);
    layers.push({
      rows,
      cols,
      latent,
      adamW: adam(rows * cols),
      isOutput: l === topology.length - 2,
      gamma: new Float64Array(cols).fill(1),
      beta: new Float64Array(cols),
      runMean: new Float64Array(cols),
      runVar: new Float64Array(cols).fill(1),
      adamGamma: adam(cols),
      adamBeta: adam(cols),
    });
  }
  return { topology: [...topology], layers };
}

/** sign with sign(0) = +1, matching the deployed >= compare. */
export function binarizeWeights(latent: Float64Array): Float64Array {
  const out = new Float64Array(latent.length);
  for (let i = 0; i < latent.length; i++) out[i] = latent[i] >= 0 ? 1 : -1;
  return out;
}

interface LayerCache {
  xIn: Float64Array; // B x rows, +-1
  wBin: Float64Array;
  u: Float64Array; // B x cols, pre-BN
  z: Float64Array | null; // B x cols, post-BN (hidden only)
  mean: Float64Array;
  invStd: Float64Array;
  xOut: Float64Array; // B x cols, +-1 (hidden) or S scores (output)
}

function forwardHidden(layer: Layer, xIn: Float64Array, batch: number,
                       train: boolean): LayerCache {
  const { rows, cols } = layer;
  const wBin = binarizeWeights(layer.latent);
  const u = new Float64Array(batch * cols);
  matmul(xIn, wBin, u, batch, rows, cols);

  const mean = new Float64Array(cols);
  const variance = new Float64Array(cols);
  if (train) {
    for (let i = 0; i < batch; i++) {
      const r = i * cols;
      for (let j = 0; j < cols; j++) mean[j] += u[r + j];
    }
    for (let j = 0; j < cols; j++) mean[j] /= batch;
    for (let i = 0; i < batch; i++) {
      const r = i * cols;
      for (let j = 0; j < cols; j++) {
        const d = u[r + j] - mean[j];
        variance[j] += d * d;
      }
    }
    for (let j = 0; j < cols; j++) variance[j] /= batch;
    for (let j = 0; j < cols; j++) {
      layer.runMean[j] = BN_MOMENTUM * layer.runMean[j] + (1 - BN_MOMENTUM) * mean[j];
      layer.runVar[j] = BN_MOMENTUM * layer.runVar[j] + (1 - BN_MOMENTUM) * variance[j];
    }
  } else {
    mean.set(layer.runMean);
    variance.set(layer.runVar);
  }

  const invStd = new Float64Array(cols);
  for (let j = 0; j < cols; j++) invStd[j] = 1 / Math.sqrt(variance[j] + BN_EPS);

  const z = new Float64Array(batch * cols);
  const xOut = new Float64Array(batch * cols);
  for (let i = 0; i < batch; i++) {
    const r = i * cols;
    for (let j = 0; j < cols; j++) {
      const zij = layer.gamma[j] * (u[r + j] - mean[j]) * invStd[j] + layer.beta[j];
      z[r + j] = zij;
      xOut[r + j] = zij >= 0 ? 1 : -1;
    }
  }
  return { xIn, wBin, u, z, mean, invStd, xOut };
}

function forwardOutput(layer: Layer, xIn: Float64Array, batch: number): LayerCache {
  const { rows, cols } = layer;
  const wBin = binarizeWeights(layer.latent);
  const u = new Float64Array(batch * cols);
  matmul(xIn, wBin, u, batch, rows, cols);
  const colSum = new Float64Array(cols);
  for (let k = 0; k < rows; k++) {
    const r = k * cols;
    for (let j = 0; j < cols; j++) colSum[j] += wBin[r + j];
  }
  const scores = new Float64Array(batch * cols);
  for (let i = 0; i < batch; i++) {
    const r = i * cols;
    for (let j = 0; j < cols; j++) scores[r + j] = (u[r + j] + colSum[j]) / 2;
  }
  return {
    xIn, wBin, u, z: null,
    mean: colSum, invStd: new Float64Array(0), xOut: scores,
  };
}

export interface BatchResult {
  loss: number;
  correct: number;
}

/** One forward/backward/Adam step over a +-1 input batch. */
export function trainBatch(model: Model, xhat: Float64Array, labels: Uint8Array,
                           batch: number, lr: number, step: number): BatchResult {
  const caches: LayerCache[] = [];
  let x = xhat;
  for (const layer of model.layers) {
    const cache = layer.isOutput
      ? forwardOutput(layer, x, batch)
      : forwardHidden(layer, x, batch, true);
    caches.push(cache);
    x = cache.xOut;
  }

  // softmax cross-entropy on logits = S / TAU
  const out = model.layers[model.layers.length - 1];
  const nClasses = out.cols;
  const scores = caches[caches.length - 1].xOut;
  const gScores = new Float64Array(batch * nClasses);
  let loss = 0;
  let correct = 0;
  for (let i = 0; i < batch; i++) {
    const r = i * nClasses;
    let best = 0;
    let maxLogit = -Infinity;
    for (let j = 0; j < nClasses; j++) {
      const logit = scores[r + j] / TAU;
      if (logit > maxLogit) {
        maxLogit = logit;
        best = j;
      }
    }
    if (best === labels[i]) correct++;
    let sumExp = 0;
    for (let j = 0; j < nClasses; j++) sumExp += Math.exp(scores[r + j] / TAU - maxLogit);
    loss += Math.log(sumExp) - (scores[r + labels[i]] / TAU - maxLogit);
    for (let j = 0; j < nClasses; j++) {
      const p = Math.exp(scores[r + j] / TAU - maxLogit) / sumExp;
      gScores[r + j] = (p - (j === labels[i] ? 1 : 0)) / batch / TAU;
    }
  }

  // backward through the layers
  let gX = gScores; // gradient w.r.t. the current layer's xOut
  for (let l = model.layers.length - 1; l >= 0; l--) {
    const layer = model.layers[l];
    const cache = caches[l];
    const { rows, cols } = layer;
    let gU: Float64Array;

    if (layer.isOutput) {
      // S = (x W + 1W)/2: dW = ((x^T g) + colsum(g)) / 2, dx = (g W^T) / 2
      gU = gX; // alias: gradient w.r.t. u arrives pre-scaled below
      const gW = new Float64Array(rows * cols);
      matmulTA(cache.xIn, gX, gW, batch, rows, cols);
      const gCol = new Float64Array(cols);
      for (let i = 0; i < batch; i++) {
        const r = i * cols;
        for (let j = 0; j < cols; j++) gCol[j] += gX[r + j];
      }
      for (let k = 0; k < rows; k++) {
        const r = k * cols;
        for (let j = 0; j < cols; j++) gW[r + j] = (gW[r + j] + gCol[j]) / 2;
      }
      adamUpdateClipped(layer.latent, gW, layer.adamW, lr, step);
      if (l > 0) {
        const gPrev = new Float64Array(batch * rows);
        matmulBT(gX, cache.wBin, gPrev, batch, rows, cols);
        for (let i = 0; i < gPrev.length; i++) gPrev[i] /= 2;
        gX = gPrev;
      }
      continue;
    }

    // activation STE: gz = gx inside |z| <= 1
    const z = cache.z!;
    const gZ = new Float64Array(batch * cols);
    for (let i = 0; i < gZ.length; i++) gZ[i] = Math.abs(z[i]) <= 1 ? gX[i] : 0;

    // batch-norm backward
    const s1 = new Float64Array(cols);
    const s2 = new Float64Array(cols);
    for (let i = 0; i < batch; i++) {
      const r = i * cols;
      for (let j = 0; j < cols; j++) {
        const uh = (cache.u[r + j] - cache.mean[j]) * cache.invStd[j];
        s1[j] += gZ[r + j];
        s2[j] += gZ[r + j] * uh;
      }
    }
    gU = new Float64Array(batch * cols);
    for (let i = 0; i < batch; i++) {
      const r = i * cols;
      for (let j = 0; j < cols; j++) {
        const uh = (cache.u[r + j] - cache.mean[j]) * cache.invStd[j];
        gU[r + j] = layer.gamma[j] * cache.invStd[j]
          * (gZ[r + j] - s1[j] / batch - (uh * s2[j]) / batch);
      }
    }
    adamUpdate(layer.gamma, s2, layer.adamGamma, lr, step);
    adamUpdate(layer.beta, s1, layer.adamBeta, lr, step);

    const gW = new Float64Array(rows * cols);
    matmulTA(cache.xIn, gU, gW, batch, rows, cols);
    adamUpdateClipped(layer.latent, gW, layer.adamW, lr, step);

    if (l > 0) {
      const gPrev = new Float64Array(batch * rows);
      matmulBT(gU, cache.wBin, gPrev, batch, rows, cols);
      gX = gPrev;
    }
  }

  return { loss: loss / batch, correct };
}

function adamUpdate(theta: Float64Array, grad: Float64Array, state: AdamState,
                    lr: number, step: number): void {
  const c1 = 1 - Math.pow(ADAM_B1, step);
  const c2 = 1 - Math.pow(ADAM_B2, step);
  for (let i = 0; i < theta.length; i++) {
    const g = grad[i];
    state.m[i] = ADAM_B1 * state.m[i] + (1 - ADAM_B1) * g;
    state.v[i] = ADAM_B2 * state.v[i] + (1 - ADAM_B2) * g * g;
    theta[i] -= (lr * (state.m[i] / c1)) / (Math.sqrt(state.v[i] / c2) + ADAM_EPS);
  }
}

/** Weight update with the STE window and [-1, 1] latent clipping. */
function adamUpdateClipped(theta: Float64Array, grad: Float64Array,
                           state: AdamState, lr: number, step: number): void {
  const c1 = 1 - Math.pow(ADAM_B1, step);
  const c2 = 1 - Math.pow(ADAM_B2, step);
  for (let i = 0; i < theta.length; i++) {
    const g = Math.abs(theta[i]) <= 1 ? grad[i] : 0;
    state.m[i] = ADAM_B1 * state.m[i] + (1 - ADAM_B1) * g;
    state.v[i] = ADAM_B2 * state.v[i] + (1 - ADAM_B2) * g * g;
    theta[i] -= (lr * (state.m[i] / c1)) / (Math.sqrt(state.v[i] / c2) + ADAM_EPS);
    if (theta[i] > 1) theta[i] = 1;
    else if (theta[i] < -1) theta[i] = -1;
  }
}

/**
 * Replace the running batch-norm statistics with exact population
 * statistics over a dataset, weights frozen.  Running averages lag the
 * statistics the weights were actually adapted to (badly so for small
 * datasets); one clean pass closes the train/deploy gap before folding.
 *
 * Pre-activations are integer-valued (+-1 inputs x +-1 weights), so the
 * float32 staging buffer stores them exactly.
 */
export function finalizeBnStats(model: Model, bits: Uint8Array, count: number,
                                width: number, batch = 500): void {
  let current: Int8Array | null = null; // +-1 activations of the previous layer
  for (const layer of model.layers) {
    if (layer.isOutput) break;
    const { rows, cols } = layer;
    const wBin = binarizeWeights(layer.latent);
    const uAll = new Float32Array(count * cols);
    const x = new Float64Array(batch * rows);
    const u = new Float64Array(batch * cols);

    for (let start = 0; start < count; start += batch) {
      const b = Math.min(batch, count - start);
      for (let i = 0; i < b; i++) {
        const s = start + i;
        if (current === null) {
          for (let k = 0; k < rows; k++) x[i * rows + k] = bits[s * width + k] ? 1 : -1;
        } else {
          for (let k = 0; k < rows; k++) x[i * rows + k] = current[s * rows + k];
        }
      }
      matmul(x, wBin, u, b, rows, cols);
      uAll.set(u.subarray(0, b * cols), start * cols);
    }

    const mean = new Float64Array(cols);
    for (let s = 0; s < count; s++) {
      const r = s * cols;
      for (let j = 0; j < cols; j++) mean[j] += uAll[r + j];
    }
    for (let j = 0; j < cols; j++) mean[j] /= count;
    const variance = new Float64Array(cols);
    for (let s = 0; s < count; s++) {
      const r = s * cols;
      for (let j = 0; j < cols; j++) {
        const d = uAll[r + j] - mean[j];
        variance[j] += d * d;
      }
    }
    for (let j = 0; j < cols; j++) variance[j] /= count;
    layer.runMean.set(mean);
    layer.runVar.set(variance);

    const next = new Int8Array(count * cols);
    for (let s = 0; s < count; s++) {
      const r = s * cols;
      for (let j = 0; j < cols; j++) {
        const s2 = Math.sqrt(variance[j] + BN_EPS);
        const z = (layer.gamma[j] * (uAll[r + j] - mean[j])) / s2 + layer.beta[j];
        next[r + j] = z >= 0 ? 1 : -1;
      }
    }
    current = next;
  }
}

// ---------------------------------------------------------------------------
// Folding and deployed evaluation
// ---------------------------------------------------------------------------

export function foldModel(model: Model): FoldedLayer[] {
  return model.layers.map((layer) => {
    const { rows, cols } = layer;
    const weights = binarizeWeights(layer.latent);
    const biases = new Float64Array(cols);
    if (layer.isOutput) return { rows, cols, weights, biases };

    for (let j = 0; j < cols; j++) {
      const g = layer.gamma[j];
      const s = Math.sqrt(layer.runVar[j] + BN_EPS);
      if (g > 0) {
        biases[j] = (layer.beta[j] * s) / g - layer.runMean[j];
      } else if (g < 0) {
        for (let k = 0; k < rows; k++) weights[k * cols + j] *= -1;
        biases[j] = layer.runMean[j] - (layer.beta[j] * s) / g;
      } else {
        // constant neuron: fires iff beta >= 0, expressed through the bias
        biases[j] = layer.beta[j] >= 0 ? rows + 1 : -(rows + 1);
      }
    }
    return { rows, cols, weights, biases };
  });
}

/** Integer thresholds of the deployed form: ceil((colsum - bias) / 2). */
export function layerThresholds(layer: FoldedLayer): Int32Array {
  const th = new Int32Array(layer.cols);
  for (let j = 0; j < layer.cols; j++) {
    let colSum = 0;
    for (let k = 0; k < layer.rows; k++) colSum += layer.weights[k * layer.cols + j];
    th[j] = Math.ceil((colSum - layer.biases[j]) / 2);
  }
  return th;
}

/**
 * Evaluate the deployed decision rule on binary spike inputs: hidden
 * neurons fire when the spike-count potential reaches the integer
 * threshold; the output class is the first argmax of the final potentials.
 * This is, by construction, exactly what the simulated hardware computes.
 */
export function deployedPredict(layers: FoldedLayer[], thresholds: Int32Array[],
                                bits: Uint8Array, offset: number): number {
  let active: number[] = [];
  for (let k = 0; k < layers[0].rows; k++) if (bits[offset + k]) active.push(k);

  for (let l = 0; l < layers.length; l++) {
    const { rows, cols, weights } = layers[l];
    const potentials = new Float64Array(cols);
    for (const k of active) {
      const r = k * cols;
      for (let j = 0; j < cols; j++) potentials[j] += weights[r + j];
    }
    if (l === layers.length - 1) {
      let best = 0;
      for (let j = 1; j < cols; j++) if (potentials[j] > potentials[best]) best = j;
      return best;
    }
    const th = thresholds[l];
    const next: number[] = [];
    for (let j = 0; j < cols; j++) if (potentials[j] >= th[j]) next.push(j);
    active = next;
  }
  throw new Error("unreachable");
}

export function deployedAccuracy(layers: FoldedLayer[], bits: Uint8Array,
                                 labels: Uint8Array, count: number,
                                 width: number): number {
  const thresholds = layers.slice(0, -1).map(layerThresholds);
  let correct = 0;
  for (let i = 0; i < count; i++) {
    if (deployedPredict(layers, thresholds, bits, i * width) === labels[i]) correct++;
  }
  return correct / count;
}
