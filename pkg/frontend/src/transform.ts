// Invertible, aspect-preserving map between workspace meters and canvas
// pixels.  The workspace rectangle is centered in the canvas at the largest
// uniform scale that fits; y is flipped (screen y grows downward).

export type Bounds = [number, number, number, number]; // left, right, bottom, top

export interface Transform {
  scale: number; // pixels per meter
  offsetX: number; // screen x of workspace left edge
  offsetY: number; // screen y of workspace TOP edge
  bounds: Bounds;
}

export function makeTransform(
  bounds: Bounds,
  width: number,
  height: number,
  margin = 10,
): Transform {
  const [left, right, bottom, top] = bounds;
  const bw = right - left;
  const bh = top - bottom;
  if (bw <= 0 || bh <= 0 || width <= 2 * margin || height <= 2 * margin) {
    throw new Error("degenerate workspace or canvas size");
  }
  const scale = Math.min((width - 2 * margin) / bw, (height - 2 * margin) / bh);
  return {
    scale,
    offsetX: (width - scale * bw) / 2,
    offsetY: (height - scale * bh) / 2,
    bounds,
  };
}

export function toScreen(t: Transform, wx: number, wy: number): [number, number] {
  const [left, , , top] = t.bounds;
  return [t.offsetX + (wx - left) * t.scale, t.offsetY + (top - wy) * t.scale];
}

export function toWorkspace(t: Transform, sx: number, sy: number): [number, number] {
  const [left, , , top] = t.bounds;
  return [left + (sx - t.offsetX) / t.scale, top - (sy - t.offsetY) / t.scale];
}

/** Clamp a workspace point into the bounds rectangle. */
export function clampToBounds(t: Transform, wx: number, wy: number): [number, number] {
  const [left, right, bottom, top] = t.bounds;
  return [
    Math.min(Math.max(wx, left), right),
    Math.min(Math.max(wy, bottom), top),
  ];
}
