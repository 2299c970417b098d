/** Weight-slider arithmetic: whatever the sliders read, the submitted
 * vector is always on the probability simplex. */

/** Renormalize raw slider readings to nonnegative weights summing to 1.
 *
 * Negative readings clamp to 0 first. An all-zero row falls back to the
 * uniform vector so a submission is always valid.
 */
export function renormalize(raw: number[]): number[] {
  if (raw.length === 0) {
    throw new Error("no slider values to normalize");
  }
  const clamped = raw.map((x) => (Number.isFinite(x) && x > 0 ? x : 0));
  const total = clamped.reduce((acc, x) => acc + x, 0);
  if (total <= 0) {
    return raw.map(() => 1 / raw.length);
  }
  return clamped.map((x) => x / total);
}

/** True when the vector is simplex-valid: nonnegative, summing to 1
 * within the service's documented tolerance. */
export function isSimplexValid(weights: number[], tolerance = 1e-9): boolean {
  if (weights.length === 0) return false;
  if (weights.some((x) => !Number.isFinite(x) || x < 0)) return false;
  const total = weights.reduce((acc, x) => acc + x, 0);
  return Math.abs(total - 1) <= tolerance;
}

/** Move one slider and redistribute the remainder proportionally across the
 * others, keeping the row on the simplex. This is what a drag does. */
export function dragTo(weights: number[], index: number, value: number): number[] {
  const target = Math.min(1, Math.max(0, value));
  const others = weights.reduce((acc, x, i) => (i === index ? acc : acc + x), 0);
  const next = weights.map((x, i) => {
    if (i === index) return target;
    if (others <= 0) return (1 - target) / (weights.length - 1);
    return (x / others) * (1 - target);
  });
  return renormalize(next);
}
