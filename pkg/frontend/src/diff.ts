// Fragment highlighting for the raw/corrected query panels. Each correction
// contributes exactly one highlight per panel (its `before` fragment on the
// raw side, its `after` fragment on the corrected side), so highlights map
// one-to-one onto the repair report's corrections.

export interface Range {
  start: number;
  end: number; // exclusive
  index: number; // which fragment claimed this range
}

const IDENT = /[A-Za-z0-9_]/;

function tokenBounded(text: string, start: number, fragment: string): boolean {
  const end = start + fragment.length;
  const beforeOk =
    start === 0 || !IDENT.test(text[start - 1]) || !IDENT.test(fragment[0]);
  const afterOk =
    end === text.length ||
    !IDENT.test(text[end]) ||
    !IDENT.test(fragment[fragment.length - 1]);
  return beforeOk && afterOk;
}

function overlaps(claimed: Range[], start: number, end: number): boolean {
  return claimed.some((r) => start < r.end && end > r.start);
}

/** Claim one occurrence of each fragment in order; `fromEnd` scans the text
 * backwards (useful for RETURN-item fragments, which sit at the end). */
export function claimRanges(
  text: string,
  fragments: string[],
  fromEnd: boolean[] = [],
): Range[] {
  const claimed: Range[] = [];
  fragments.forEach((fragment, index) => {
    if (!fragment) {
      return;
    }
    const positions: number[] = [];
    let at = text.indexOf(fragment);
    while (at !== -1) {
      positions.push(at);
      at = text.indexOf(fragment, at + 1);
    }
    if (fromEnd[index]) {
      positions.reverse();
    }
    for (const start of positions) {
      const end = start + fragment.length;
      if (!tokenBounded(text, start, fragment) || overlaps(claimed, start, end)) {
        continue;
      }
      claimed.push({ start, end, index });
      break;
    }
  });
  return claimed.sort((a, b) => a.start - b.start);
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface HighlightResult {
  html: string;
  matched: number;
}

export function highlightFragments(
  text: string,
  fragments: string[],
  fromEnd: boolean[] = [],
): HighlightResult {
  const ranges = claimRanges(text, fragments, fromEnd);
  let html = "";
  let cursor = 0;
  for (const range of ranges) {
    html += escapeHtml(text.slice(cursor, range.start));
    html += `<mark data-correction="${range.index}">`;
    html += escapeHtml(text.slice(range.start, range.end));
    html += "</mark>";
    cursor = range.end;
  }
  html += escapeHtml(text.slice(cursor));
  return { html, matched: ranges.length };
}
