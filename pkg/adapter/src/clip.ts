/** Clip directory layout: clip.json metadata plus one frame_NNNNNN.bin file
 * per frame holding raw binary PPM bytes. The same file naming is what the
 * channel's payload and received-payload directories use, so a generated
 * clip can be transmitted and its corrupted copy re-scored without renaming
 * anything. */

import * as fs from "node:fs";
import * as path from "node:path";

import { RESOLUTIONS } from "./catalog.js";
import { encodePpm } from "./ppm.js";
import { defaultScene, renderFrame } from "./scene.js";

export interface ClipMeta {
  resolution_label: string;
  width: number;
  height: number;
  fps: number;
  frame_count: number;
  seed: number;
}

export function frameFileName(index: number): string {
  return `frame_${String(index).padStart(6, "0")}.bin`;
}

export function generateClip(dir: string, resolutionLabel: string, frameCount: number,
                             seed: number, fps = 30): ClipMeta {
  const res = RESOLUTIONS[resolutionLabel];
  if (!res) {
    throw new Error(`unknown resolution label ${resolutionLabel}`);
  }
  if (frameCount < 0) {
    throw new Error(`frame count must be >= 0, got ${frameCount}`);
  }
  fs.mkdirSync(dir, { recursive: true });
  const vehicles = defaultScene(frameCount);
  for (let i = 0; i < frameCount; i++) {
    const image = renderFrame(res.width, res.height, i, vehicles, seed);
    fs.writeFileSync(path.join(dir, frameFileName(i)), encodePpm(image));
  }
  const meta: ClipMeta = {
    resolution_label: resolutionLabel,
    width: res.width,
    height: res.height,
    fps,
    frame_count: frameCount,
    seed,
  };
  fs.writeFileSync(path.join(dir, "clip.json"), JSON.stringify(meta, null, 2) + "\n");
  return meta;
}

export function readClipMeta(dir: string): ClipMeta {
  const raw = fs.readFileSync(path.join(dir, "clip.json"), "utf-8");
  return JSON.parse(raw) as ClipMeta;
}

export function readFrame(dir: string, index: number): Uint8Array | null {
  const file = path.join(dir, frameFileName(index));
  if (!fs.existsSync(file)) {
    return null;
  }
  return fs.readFileSync(file);
}

/** Frame indices present in a payload/received directory, sorted. */
export function listFrameIndices(dir: string): number[] {
  const indices: number[] = [];
  for (const name of fs.readdirSync(dir)) {
    const match = /^frame_(\d{6})\.bin$/.exec(name);
    if (match) {
      indices.push(Number(match[1]));
    }
  }
  indices.sort((a, b) => a - b);
  return indices;
}
