/**
 * Parsing and validation of pmrsim sweep CSV files.
 *
 * The producer contract is fixed:
 *   snr_db,mismatch_db,decoder,i_max,frames,bit_errors,frame_errors,ber,fer,seconds
 */

export const EXPECTED_HEADER =
  "snr_db,mismatch_db,decoder,i_max,frames,bit_errors,frame_errors,ber,fer,seconds";

export interface SweepRow {
  snr_db: number;
  mismatch_db: number;
  decoder: string;
  i_max: string;
  frames: number;
  bit_errors: number;
  frame_errors: number;
  ber: number;
  fer: number;
  seconds: number;
}

export class CsvError extends Error {}

/** Parse a sweep CSV; throws CsvError on schema violations or empty data. */
export function parseSweepCsv(text: string): SweepRow[] {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new CsvError("empty CSV: no header line");
  }
  if (lines[0] !== EXPECTED_HEADER) {
    throw new CsvError(
      `schema mismatch: expected header\n  ${EXPECTED_HEADER}\ngot\n  ${lines[0]}`
    );
  }
  if (lines.length === 1) {
    throw new CsvError("empty CSV: header but no data rows");
  }

  const rows: SweepRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== 10) {
      throw new CsvError(`line ${i + 1}: expected 10 fields, found ${parts.length}`);
    }
    const num = (idx: number, name: string): number => {
      const v = Number(parts[idx]);
      if (!Number.isFinite(v)) {
        throw new CsvError(`line ${i + 1}: ${name} is not a finite number: ${parts[idx]}`);
      }
      return v;
    };
    // measurements may be NaN (e.g. a point that produced no frames);
    // such rows are skipped with a warning at grouping time
    const measurement = (idx: number): number => Number(parts[idx]);
    rows.push({
      snr_db: num(0, "snr_db"),
      mismatch_db: num(1, "mismatch_db"),
      decoder: parts[2],
      i_max: parts[3],
      frames: num(4, "frames"),
      bit_errors: num(5, "bit_errors"),
      frame_errors: num(6, "frame_errors"),
      ber: measurement(7),
      fer: measurement(8),
      seconds: measurement(9),
    });
  }
  return rows;
}
