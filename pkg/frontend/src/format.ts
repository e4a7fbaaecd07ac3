// Pure presentation helpers. Values come from the API verbatim; the only
// work done here is formatting.

export function erPercent(er: number): string {
  return `${Math.round(er * 100)}%`;
}

export function cerBadge(cer: number): string {
  if (cer > 0) return `+${cer}`;
  if (cer < 0) return `−${Math.abs(cer)}`;
  return "0";
}

export function merText(mer: number | null): string {
  return mer === null ? "—" : String(mer);
}

/** Client-side gate for the MER input: integers 0..100 only. */
export function validMer(raw: string): number | null {
  if (!/^\d{1,3}$/.test(raw.trim())) return null;
  const value = Number(raw.trim());
  return value >= 0 && value <= 100 ? value : null;
}

/** Age of the last scoring, for the staleness flag. */
export function scoredAgeMinutes(lastScored: string | null, now: Date = new Date()): number | null {
  if (!lastScored) return null;
  const ts = Date.parse(lastScored);
  if (Number.isNaN(ts)) return null;
  return Math.max(0, Math.floor((now.getTime() - ts) / 60000));
}

export function staleLabel(ageMinutes: number | null, thresholdMinutes = 60): string | null {
  if (ageMinutes === null || ageMinutes < thresholdMinutes) return null;
  if (ageMinutes < 120) return `stale: scored ${ageMinutes} min ago`;
  const hours = Math.floor(ageMinutes / 60);
  return `stale: scored ${hours} h ago`;
}
