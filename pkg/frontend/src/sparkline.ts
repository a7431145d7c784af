/** Minimal SVG sparkline path generation for metric series. */

export interface SparklineOptions {
  width: number;
  height: number;
  max?: number;
}

/**
 * Build an SVG path for the series, scaled to the viewport; null gaps in
 * the series break the line. Returns "" for an empty series.
 */
export function sparklinePath(values: (number | null)[], options: SparklineOptions): string {
  const present = values.filter((v): v is number => v !== null);
  if (present.length === 0) {
    return "";
  }
  const max = options.max ?? Math.max(...present, 1e-9);
  const n = values.length;
  const stepX = n > 1 ? options.width / (n - 1) : 0;
  const parts: string[] = [];
  let penDown = false;
  values.forEach((value, i) => {
    if (value === null) {
      penDown = false;
      return;
    }
    const x = (i * stepX).toFixed(2);
    const clamped = Math.min(value / max, 1);
    const y = (options.height * (1 - clamped)).toFixed(2);
    parts.push(`${penDown ? "L" : "M"}${x},${y}`);
    penDown = true;
  });
  return parts.join(" ");
}

/** Fixed-capacity series buffer for live metrics. */
export class SeriesBuffer {
  private values: (number | null)[] = [];

  constructor(private readonly capacity = 60) {}

  push(value: number | null): void {
    this.values.push(value);
    if (this.values.length > this.capacity) {
      this.values.splice(0, this.values.length - this.capacity);
    }
  }

  snapshot(): (number | null)[] {
    return [...this.values];
  }

  last(): number | null {
    return this.values.length ? this.values[this.values.length - 1] ?? null : null;
  }
}
