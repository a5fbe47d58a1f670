// Pure plotting helpers: calendar-time x scale, probability y scale, tick
// selection. Kept framework-free so they are trivially unit-testable.

export type Range = [number, number];

export function parseDay(iso: string): number {
  // days since epoch, UTC; avoids TZ drift when diffing dates
  return Date.parse(`${iso}T00:00:00Z`) / 86_400_000;
}

export function timeScale(dates: string[], pixelRange: Range): (iso: string) => number {
  const days = dates.map(parseDay);
  const lo = Math.min(...days);
  const hi = Math.max(...days);
  const [p0, p1] = pixelRange;
  if (hi === lo) {
    const mid = (p0 + p1) / 2;
    return () => mid;
  }
  return (iso) => p0 + ((parseDay(iso) - lo) / (hi - lo)) * (p1 - p0);
}

export function probabilityScale(pixelRange: Range): (p: number) => number {
  // y axis: probability 0 at the bottom, 1 at the top
  const [bottom, top] = pixelRange;
  return (p) => bottom + p * (top - bottom);
}

export function probabilitiesValid(probs: number[]): boolean {
  return probs.every((p) => Number.isFinite(p) && p >= 0 && p <= 1);
}

export function dateTicks(dates: string[], maxTicks = 5): string[] {
  if (dates.length <= maxTicks) return [...dates];
  const step = (dates.length - 1) / (maxTicks - 1);
  const ticks: string[] = [];
  for (let k = 0; k < maxTicks; k += 1) {
    ticks.push(dates[Math.round(k * step)]);
  }
  return [...new Set(ticks)];
}

export function polylinePath(xs: number[], ys: number[]): string {
  return xs.map((x, k) => `${k === 0 ? 'M' : 'L'}${x.toFixed(1)},${ys[k].toFixed(1)}`).join(' ');
}
