/** The two adapter operations: score a clip (sender side) and score a
 * directory of received payloads (receiver side, after the channel). */

import * as fs from "node:fs";

import { listFrameIndices, readClipMeta, readFrame } from "./clip.js";
import { detectVehicles, ModelTier } from "./detector.js";
import { decodePpm } from "./ppm.js";
import { detectionLogText, LogRow } from "./logfmt.js";

export interface AdapterConfig {
  videoPath: string;
  modelTier: ModelTier;
  outputLogPath: string;
  frameStride: number;
}

export interface TargetDescriptor {
  vehicleType: string;
  vehicleMake: string;
}

export const DEFAULT_TARGET: TargetDescriptor = {
  vehicleType: "car",
  vehicleMake: "Ford Expedition 2017",
};

function checkConfig(config: AdapterConfig): void {
  if (config.frameStride < 1) {
    throw new Error(`frame_stride must be >= 1, got ${config.frameStride}`);
  }
  if (config.modelTier !== "tiny" && config.modelTier !== "large") {
    throw new Error(`model_tier must be tiny or large, got ${config.modelTier}`);
  }
}

/** Sender side: decode every stride-th clip frame and log all detections.
 * Undecodable frames are skipped with a warning, like a lost frame. */
export function extractAndDetect(config: AdapterConfig): LogRow[] {
  checkConfig(config);
  const meta = readClipMeta(config.videoPath);
  const rows: LogRow[] = [];
  for (let i = 0; i < meta.frame_count; i += config.frameStride) {
    const data = readFrame(config.videoPath, i);
    if (data === null) {
      console.warn(`frame ${i}: missing file, skipping`);
      continue;
    }
    const image = decodePpm(data);
    if (image === null) {
      console.warn(`frame ${i}: undecodable, skipping`);
      continue;
    }
    for (const d of detectVehicles(image, config.modelTier)) {
      rows.push({
        frameIndex: i,
        vehicleType: d.signature.vehicleType,
        vehicleMake: d.signature.vehicleMake,
        probability: d.probability,
        bboxId: d.bboxId,
      });
    }
  }
  fs.writeFileSync(config.outputLogPath, detectionLogText(rows));
  return rows;
}

/** Receiver side: score whatever payload files the channel delivered.
 * The target vehicle gets exactly one row per frame (its best probability,
 * 0 when the frame is undecodable or the vehicle is not found) so per-GOP
 * averages are well defined; other detections are logged as usual. */
export function scoreReceived(receivedDir: string, tier: ModelTier,
                              outputLogPath: string,
                              target: TargetDescriptor = DEFAULT_TARGET): LogRow[] {
  const rows: LogRow[] = [];
  for (const index of listFrameIndices(receivedDir)) {
    const data = readFrame(receivedDir, index);
    const image = data === null ? null : decodePpm(data);
    let targetProb = 0;
    if (image !== null) {
      for (const d of detectVehicles(image, tier)) {
        const isTarget = d.signature.vehicleType === target.vehicleType
          && d.signature.vehicleMake === target.vehicleMake;
        if (isTarget) {
          targetProb = Math.max(targetProb, d.probability);
        } else {
          rows.push({
            frameIndex: index,
            vehicleType: d.signature.vehicleType,
            vehicleMake: d.signature.vehicleMake,
            probability: d.probability,
            bboxId: d.bboxId,
          });
        }
      }
    }
    rows.push({
      frameIndex: index,
      vehicleType: target.vehicleType,
      vehicleMake: target.vehicleMake,
      probability: targetProb,
      bboxId: null,
    });
  }
  fs.writeFileSync(outputLogPath, detectionLogText(rows));
  return rows;
}
