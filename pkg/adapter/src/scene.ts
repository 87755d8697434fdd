/** Synthetic traffic scene renderer.
 *
 * Vehicles are solid color-coded bodies moving over noisy asphalt with a
 * dashed lane line. Body edges get a one-pixel blend ring with the
 * background; at low resolutions that ring is a large fraction of the
 * vehicle's area, which is exactly what starves the detector of evidence.
 */

import { ASPHALT, CATALOG, LANE_PAINT, VehicleSignature } from "./catalog.js";
import { Image } from "./ppm.js";
import { frameSeed, mulberry32 } from "./prng.js";

export interface SceneVehicle {
  signature: VehicleSignature;
  /** frame range in which the vehicle is on screen */
  enterFrame: number;
  exitFrame: number;
  /** normalized vertical center of the body */
  laneY: number;
  /** normalized horizontal travel across the visible span */
  fromX: number;
  toX: number;
}

export function defaultScene(frameCount: number): SceneVehicle[] {
  const mid = Math.floor(frameCount / 2);
  return [
    {
      signature: CATALOG[0], // the target vehicle, on screen for the middle stretch
      enterFrame: Math.floor(frameCount * 0.2),
      exitFrame: Math.max(Math.floor(frameCount * 0.85), mid + 1),
      laneY: 0.42,
      fromX: 0.12,
      toX: 0.82,
    },
    {
      signature: CATALOG[1],
      enterFrame: 0,
      exitFrame: Math.floor(frameCount * 0.6),
      laneY: 0.62,
      fromX: 0.75,
      toX: 0.15,
    },
    {
      signature: CATALOG[2],
      enterFrame: Math.floor(frameCount * 0.35),
      exitFrame: frameCount - 1,
      laneY: 0.8,
      fromX: 0.05,
      toX: 0.7,
    },
  ];
}

export function renderFrame(width: number, height: number, frameIndex: number,
                            vehicles: SceneVehicle[], seed: number): Image {
  const rand = mulberry32(frameSeed(seed, frameIndex));
  const pixels = new Uint8Array(width * height * 3);

  const laneRow0 = Math.floor(height * 0.52);
  const laneRow1 = laneRow0 + Math.max(1, Math.floor(height / 144));
  const dash = Math.max(4, Math.floor(width / 32));
  let p = 0;
  for (let y = 0; y < height; y++) {
    const onLane = y >= laneRow0 && y < laneRow1;
    for (let x = 0; x < width; x++) {
      const base = onLane && Math.floor(x / dash) % 2 === 0 ? LANE_PAINT : ASPHALT;
      const n = Math.floor(rand() * 17) - 8;
      pixels[p] = clampByte(base[0] + n);
      pixels[p + 1] = clampByte(base[1] + n);
      pixels[p + 2] = clampByte(base[2] + n);
      p += 3;
    }
  }

  for (const vehicle of vehicles) {
    if (frameIndex < vehicle.enterFrame || frameIndex > vehicle.exitFrame) {
      continue;
    }
    const span = Math.max(1, vehicle.exitFrame - vehicle.enterFrame);
    const t = (frameIndex - vehicle.enterFrame) / span;
    const cx = vehicle.fromX + (vehicle.toX - vehicle.fromX) * t;
    drawBody(pixels, width, height, vehicle.signature, cx, vehicle.laneY, rand);
  }
  return { width, height, pixels };
}

function drawBody(pixels: Uint8Array, width: number, height: number,
                  sig: VehicleSignature, cx: number, cy: number,
                  rand: () => number): void {
  const bw = Math.max(3, Math.round(sig.width * width));
  const bh = Math.max(3, Math.round(sig.height * height));
  const x0 = Math.round(cx * width - bw / 2);
  const y0 = Math.round(cy * height - bh / 2);
  for (let y = y0; y < y0 + bh; y++) {
    if (y < 0 || y >= height) {
      continue;
    }
    for (let x = x0; x < x0 + bw; x++) {
      if (x < 0 || x >= width) {
        continue;
      }
      const edge = x === x0 || x === x0 + bw - 1 || y === y0 || y === y0 + bh - 1;
      const p = (y * width + x) * 3;
      if (edge) {
        pixels[p] = clampByte((pixels[p] + sig.color[0]) >> 1);
        pixels[p + 1] = clampByte((pixels[p + 1] + sig.color[1]) >> 1);
        pixels[p + 2] = clampByte((pixels[p + 2] + sig.color[2]) >> 1);
      } else {
        const n = Math.floor(rand() * 9) - 4;
        pixels[p] = clampByte(sig.color[0] + n);
        pixels[p + 1] = clampByte(sig.color[1] + n);
        pixels[p + 2] = clampByte(sig.color[2] + n);
      }
    }
  }
}

function clampByte(v: number): number {
  return v < 0 ? 0 : v > 255 ? 255 : v;
}
