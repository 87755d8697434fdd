/** Manifest document emitter for a clip directory: real per-frame byte sizes
 * feed the simulator's power and corruption accounting. The document schema
 * belongs to the streaming pipeline; this writer exists so a clip can enter
 * the chain without hand-editing. */

import * as fs from "node:fs";
import * as path from "node:path";

import { frameFileName, readClipMeta } from "./clip.js";

export function manifestText(clipDir: string, mtuBytes = 1500,
                             gopLengthFrames?: number): string {
  const meta = readClipMeta(clipDir);
  const gopLength = gopLengthFrames ?? meta.fps;
  const lines = [
    `resolution_label: ${meta.resolution_label}`,
    `fps: ${meta.fps}`,
    `gop_length_frames: ${gopLength}`,
    `mtu_bytes: ${mtuBytes}`,
    "",
    "index,frame_type,size_bytes,payload_seed",
  ];
  for (let i = 0; i < meta.frame_count; i++) {
    const size = fs.statSync(path.join(clipDir, frameFileName(i))).size;
    const offset = i % gopLength;
    const frameType = offset === 0 ? "I" : offset % 3 === 0 ? "P" : "B";
    lines.push(`${i},${frameType},${size},${i}`);
  }
  return lines.join("\n") + "\n";
}
