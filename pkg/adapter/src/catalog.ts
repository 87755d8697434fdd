/** Vehicle signature catalog shared by the renderer and the detectors.
 *
 * Each (type, make) gets a body color far enough from the asphalt, the lane
 * markings, and every other signature that loose color matching cannot
 * confuse them. Sizes are normalized to frame dimensions so the same scene
 * rendered at a lower resolution genuinely carries less evidence per vehicle.
 */

export interface VehicleSignature {
  vehicleType: string;
  vehicleMake: string;
  color: [number, number, number];
  /** body size, fraction of frame width/height */
  width: number;
  height: number;
}

export const ASPHALT: [number, number, number] = [70, 70, 70];
export const LANE_PAINT: [number, number, number] = [230, 230, 228];

export const CATALOG: VehicleSignature[] = [
  {
    vehicleType: "car",
    vehicleMake: "Ford Expedition 2017",
    color: [200, 30, 44],
    width: 0.16,
    height: 0.07,
  },
  {
    vehicleType: "car",
    vehicleMake: "Toyota Corolla 2015",
    color: [40, 90, 200],
    width: 0.12,
    height: 0.055,
  },
  {
    vehicleType: "truck",
    vehicleMake: "Ford F-150 2019",
    color: [10, 190, 80],
    width: 0.2,
    height: 0.085,
  },
];

export const RESOLUTIONS: Record<string, { width: number; height: number }> = {
  "144p": { width: 256, height: 144 },
  "360p": { width: 640, height: 360 },
  "720p": { width: 1280, height: 720 },
  "1080p": { width: 1920, height: 1080 },
  "2160p": { width: 3840, height: 2160 },
};

export function colorDistance(
  r: number, g: number, b: number, c: [number, number, number]): number {
  const dr = r - c[0];
  const dg = g - c[1];
  const db = b - c[2];
  return Math.sqrt(dr * dr + dg * dg + db * db);
}
