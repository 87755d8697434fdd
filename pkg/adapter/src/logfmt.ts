/** Detection-log document writer. The column set and order are the ingest
 * contract of the streaming pipeline; rows are sorted by frame then bbox so
 * output is deterministic given fixed detector output. */

export interface LogRow {
  frameIndex: number;
  vehicleType: string;
  vehicleMake: string;
  probability: number;
  bboxId: number | null;
}

const HEADER = "frame_index,vehicle_type,vehicle_make,probability,bbox_id";

function csvField(value: string): string {
  if (value.includes(",") || value.includes("\"") || value.includes("\n")) {
    return `"${value.replace(/"/g, '""')}"`;
  }
  return value;
}

export function detectionLogText(rows: LogRow[]): string {
  const sorted = [...rows].sort(
    (a, b) => a.frameIndex - b.frameIndex
      || a.vehicleType.localeCompare(b.vehicleType)
      || a.vehicleMake.localeCompare(b.vehicleMake)
      || (a.bboxId ?? -1) - (b.bboxId ?? -1));
  const lines = [HEADER];
  for (const row of sorted) {
    if (!(row.probability >= 0 && row.probability <= 1)) {
      throw new Error(`probability out of range for frame ${row.frameIndex}: ${row.probability}`);
    }
    lines.push([
      String(row.frameIndex),
      csvField(row.vehicleType),
      csvField(row.vehicleMake),
      String(row.probability),
      row.bboxId === null ? "" : String(row.bboxId),
    ].join(","));
  }
  return lines.join("\n") + "\n";
}
