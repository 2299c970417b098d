/** Projection of coverage-set values onto two chosen objectives, scaled to
 * the unit square for SVG placement. Pure data mapping: which entry is
 * highlighted comes from the service-reported active policy id. */
import type { CoverageDoc } from "./types";

export interface ScatterPoint {
  policyId: number;
  x: number;
  y: number;
  label: string;
  active: boolean;
}

export function projectEntries(
  coverage: CoverageDoc,
  axisX: number,
  axisY: number,
  activePolicyId: number | null,
): ScatterPoint[] {
  const xs = coverage.entries.map((e) => e.value[axisX] ?? 0);
  const ys = coverage.entries.map((e) => e.value[axisY] ?? 0);
  const spanOf = (vals: number[]) => {
    const lo = Math.min(...vals);
    const hi = Math.max(...vals);
    return { lo, span: hi - lo > 0 ? hi - lo : 1 };
  };
  const sx = spanOf(xs);
  const sy = spanOf(ys);
  return coverage.entries.map((entry, i) => ({
    policyId: entry.policy_id,
    x: ((xs[i] ?? 0) - sx.lo) / sx.span,
    y: ((ys[i] ?? 0) - sy.lo) / sy.span,
    label: entry.value.map((v) => v.toPrecision(4)).join(", "),
    active: entry.policy_id === activePolicyId,
  }));
}
