/** Split a report's explanation block into its labeled sections.
 *
 * The server renders the block as:
 *
 *   CUES:
 *   - <line>
 *   RATIONALE:
 *   <text>
 *   EVIDENCE:
 *   - <line>
 *
 * Bullet lines are returned with the "- " prefix stripped but otherwise
 * untouched, so the displayed evidence is byte-identical to the wire text.
 */

export interface ExplanationSections {
  cues: string[];
  rationale: string;
  evidence: string[];
}

const HEADERS = ["CUES:", "RATIONALE:", "EVIDENCE:"] as const;

export function splitExplanation(text: string): ExplanationSections {
  const sections: Record<string, string[]> = { "CUES:": [], "RATIONALE:": [], "EVIDENCE:": [] };
  let current: string | null = null;
  for (const line of text.split("\n")) {
    if ((HEADERS as readonly string[]).includes(line)) {
      current = line;
      continue;
    }
    if (current !== null) {
      sections[current]!.push(line);
    }
  }
  const stripBullet = (line: string) => (line.startsWith("- ") ? line.slice(2) : line);
  return {
    cues: sections["CUES:"]!.map(stripBullet),
    rationale: sections["RATIONALE:"]!.join("\n"),
    evidence: sections["EVIDENCE:"]!.map(stripBullet),
  };
}
