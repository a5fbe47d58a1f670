// Split a context snippet into plain/highlighted segments around the matched
// surface text, so the renderer never touches innerHTML with API data.

export type Segment = {
  text: string;
  highlighted: boolean;
};

export function highlightSegments(context: string, surfaceText: string): Segment[] {
  if (!surfaceText) return [{ text: context, highlighted: false }];
  let at = context.indexOf(surfaceText);
  if (at < 0) {
    // the API guarantees containment; fall back to case-insensitive just in case
    at = context.toLowerCase().indexOf(surfaceText.toLowerCase());
    if (at < 0) return [{ text: context, highlighted: false }];
  }
  const segments: Segment[] = [];
  if (at > 0) segments.push({ text: context.slice(0, at), highlighted: false });
  segments.push({ text: context.slice(at, at + surfaceText.length), highlighted: true });
  if (at + surfaceText.length < context.length) {
    segments.push({ text: context.slice(at + surfaceText.length), highlighted: false });
  }
  return segments;
}
