/** Color-region vehicle detectors standing in for the tiny/large model pair.
 *
 * Both tiers run the same honest pipeline: nearest-neighbor sample onto an
 * analysis grid, mark pixels within a loose color distance of a catalog
 * signature, grow 4-connected components, and measure each component's
 * purity (fraction of members within a tight distance). Purity is the
 * resolution signal: the renderer blends one native pixel of body edge with
 * the background, so small renderings are mostly edge and large ones are
 * mostly clean interior. A tier is its grid size plus its confidence
 * calibration curve; the tiny tier's curve is steeper and saturates later,
 * which is what makes it lose low-resolution vehicles first.
 */

import { CATALOG, colorDistance, VehicleSignature } from "./catalog.js";
import { Image } from "./ppm.js";

export type ModelTier = "tiny" | "large";

export interface Detection {
  signature: VehicleSignature;
  probability: number;
  /** per-frame ordinal, largest component first */
  bboxId: number;
  areaPx: number;
  purity: number;
}

const LOOSE_DISTANCE = 110;
const TIGHT_DISTANCE = 25;
const MIN_AREA_PX = 24;

const TIER_GRID: Record<ModelTier, number> = { tiny: 160, large: 640 };

function calibrate(tier: ModelTier, purity: number): number {
  // fixed per-tier confidence calibration (a detector's score head, in effect)
  if (tier === "tiny") {
    const x = Math.min(1, Math.max(0, (purity - 0.5) / 0.42));
    return Math.pow(x, 1.3);
  }
  return Math.min(1, Math.max(0, (purity - 0.35) / 0.64));
}

export function detectVehicles(image: Image, tier: ModelTier): Detection[] {
  const grid = sampleGrid(image, TIER_GRID[tier]);
  const { width, height, labels, tight } = grid;

  const seen = new Int32Array(width * height).fill(-1);
  const components: { signature: VehicleSignature; area: number; tightCount: number }[] = [];
  const stack: number[] = [];
  for (let start = 0; start < labels.length; start++) {
    if (labels[start] < 0 || seen[start] >= 0) {
      continue;
    }
    const label = labels[start];
    const id = components.length;
    let area = 0;
    let tightCount = 0;
    stack.push(start);
    seen[start] = id;
    while (stack.length > 0) {
      const p = stack.pop() as number;
      area++;
      tightCount += tight[p];
      const x = p % width;
      const y = (p - x) / width;
      if (x > 0) visit(p - 1);
      if (x < width - 1) visit(p + 1);
      if (y > 0) visit(p - width);
      if (y < height - 1) visit(p + width);
    }
    components.push({ signature: CATALOG[label], area, tightCount });

    function visit(q: number): void {
      if (labels[q] === label && seen[q] < 0) {
        seen[q] = id;
        stack.push(q);
      }
    }
  }

  const detections: Detection[] = [];
  for (const comp of components) {
    if (comp.area < MIN_AREA_PX) {
      continue;
    }
    const purity = comp.tightCount / comp.area;
    const probability = calibrate(tier, purity);
    if (probability <= 0) {
      continue;
    }
    detections.push({
      signature: comp.signature,
      probability: round4(probability),
      bboxId: 0,
      areaPx: comp.area,
      purity,
    });
  }
  detections.sort((a, b) => b.areaPx - a.areaPx || b.probability - a.probability);
  detections.forEach((d, i) => {
    d.bboxId = i;
  });
  return detections;
}

interface Grid {
  width: number;
  height: number;
  /** catalog index of the nearest in-range signature, else -1 */
  labels: Int8Array;
  /** 1 when the pixel is within the tight distance of its signature */
  tight: Uint8Array;
}

function sampleGrid(image: Image, cap: number): Grid {
  const scale = Math.min(1, cap / image.width);
  const width = Math.max(1, Math.round(image.width * scale));
  const height = Math.max(1, Math.round(image.height * scale));
  const labels = new Int8Array(width * height).fill(-1);
  const tight = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    const sy = Math.min(image.height - 1, Math.floor(((y + 0.5) * image.height) / height));
    for (let x = 0; x < width; x++) {
      const sx = Math.min(image.width - 1, Math.floor(((x + 0.5) * image.width) / width));
      const p = (sy * image.width + sx) * 3;
      const r = image.pixels[p];
      const g = image.pixels[p + 1];
      const b = image.pixels[p + 2];
      let best = -1;
      let bestDist = LOOSE_DISTANCE;
      for (let c = 0; c < CATALOG.length; c++) {
        const dist = colorDistance(r, g, b, CATALOG[c].color);
        if (dist <= bestDist) {
          best = c;
          bestDist = dist;
        }
      }
      const q = y * width + x;
      labels[q] = best;
      if (best >= 0 && bestDist <= TIGHT_DISTANCE) {
        tight[q] = 1;
      }
    }
  }
  return { width, height, labels, tight };
}

function round4(x: number): number {
  return Math.round(x * 10000) / 10000;
}
