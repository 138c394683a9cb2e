/** Dense row-major Float64Array matrix kernels.
 *
 * The three shapes a fully-connected backprop needs, each written with the
 * contiguous-inner-loop access pattern V8 optimizes well.  Two k-steps are
 * fused per pass in matmul to cut the C-row traffic in half.
 */

/** C[m,n] = A[m,k] @ B[k,n] */
export function matmul(
  A: Float64Array, B: Float64Array, C: Float64Array,
  m: number, k: number, n: number,
): void {
  C.fill(0);
  for (let i = 0; i < m; i++) {
    const ci = i * n;
    const ai = i * k;
    let p = 0;
    for (; p + 1 < k; p += 2) {
      const a0 = A[ai + p];
      const a1 = A[ai + p + 1];
      if (a0 === 0 && a1 === 0) continue;
      const b0 = p * n;
      const b1 = b0 + n;
      for (let j = 0; j < n; j++) C[ci + j] += a0 * B[b0 + j] + a1 * B[b1 + j];
    }
    if (p < k) {
      const a0 = A[ai + p];
      if (a0 !== 0) {
        const b0 = p * n;
        for (let j = 0; j < n; j++) C[ci + j] += a0 * B[b0 + j];
      }
    }
  }
}

/** C[k,n] += or = A[m,k]^T @ G[m,n]  (weight gradients) */
export function matmulTA(
  A: Float64Array, G: Float64Array, C: Float64Array,
  m: number, k: number, n: number,
): void {
  C.fill(0);
  for (let i = 0; i < m; i++) {
    const ai = i * k;
    const gi = i * n;
    for (let p = 0; p < k; p++) {
      const a = A[ai + p];
      if (a === 0) continue;
      const cp = p * n;
      for (let j = 0; j < n; j++) C[cp + j] += a * G[gi + j];
    }
  }
}

/** C[m,k] = G[m,n] @ W[k,n]^T  (input gradients) */
export function matmulBT(
  G: Float64Array, W: Float64Array, C: Float64Array,
  m: number, k: number, n: number,
): void {
  for (let i = 0; i < m; i++) {
    const gi = i * n;
    const ci = i * k;
    for (let p = 0; p < k; p++) {
      const wp = p * n;
      let acc = 0;
      for (let j = 0; j < n; j++) acc += G[gi + j] * W[wp + j];
      C[ci + p] = acc;
    }
  }
}
