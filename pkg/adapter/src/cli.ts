#!/usr/bin/env node
/** detector-adapter CLI.
 *
 *   gen            render a synthetic traffic clip (frame_NNNNNN.bin + clip.json)
 *   detect         run a model tier over a clip, emit a detection-log document
 *   score-received score a directory of channel-delivered payloads
 *   make-manifest  emit the pipeline's manifest document for a clip
 */

import * as fs from "node:fs";

import { generateClip } from "./clip.js";
import { extractAndDetect, scoreReceived, DEFAULT_TARGET } from "./detect.js";
import { ModelTier } from "./detector.js";
import { manifestText } from "./manifest.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`expected --flag value pairs, got ${argv.slice(i).join(" ")}`);
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) {
    throw new Error(`missing required flag --${name}`);
  }
  return value;
}

function tierOf(flags: Map<string, string>): ModelTier {
  const tier = flags.get("tier") ?? "tiny";
  if (tier !== "tiny" && tier !== "large") {
    throw new Error(`--tier must be tiny or large, got ${tier}`);
  }
  return tier;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    const flags = parseFlags(rest);
    switch (command) {
      case "gen": {
        const meta = generateClip(
          need(flags, "out"),
          flags.get("resolution") ?? "720p",
          Number(flags.get("frames") ?? "30"),
          Number(flags.get("seed") ?? "1"),
          Number(flags.get("fps") ?? "30"));
        console.log(`generated ${meta.frame_count} frames at ${meta.width}x${meta.height}`);
        return 0;
      }
      case "detect": {
        const rows = extractAndDetect({
          videoPath: need(flags, "clip"),
          modelTier: tierOf(flags),
          outputLogPath: need(flags, "out"),
          frameStride: Number(flags.get("stride") ?? "1"),
        });
        console.log(`wrote ${need(flags, "out")} (${rows.length} detections)`);
        return 0;
      }
      case "score-received": {
        const target = {
          vehicleType: flags.get("target-type") ?? DEFAULT_TARGET.vehicleType,
          vehicleMake: flags.get("target-make") ?? DEFAULT_TARGET.vehicleMake,
        };
        const rows = scoreReceived(need(flags, "received"), tierOf(flags),
                                   need(flags, "out"), target);
        console.log(`wrote ${need(flags, "out")} (${rows.length} rows)`);
        return 0;
      }
      case "make-manifest": {
        const text = manifestText(
          need(flags, "clip"),
          Number(flags.get("mtu") ?? "1500"),
          flags.has("gop-length") ? Number(flags.get("gop-length")) : undefined);
        fs.writeFileSync(need(flags, "out"), text);
        console.log(`wrote ${need(flags, "out")}`);
        return 0;
      }
      default:
        console.error("usage: detector-adapter <gen|detect|score-received|make-manifest> "
          + "--flag value ...");
        return 2;
    }
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

process.exitCode = main(process.argv.slice(2));
