import { describe, expect, it } from 'vitest';

import { highlightSegments } from '../src/highlight.js';

describe('highlightSegments', () => {
  it('splits around the matched surface text', () => {
    const segments = highlightSegments('started hospice referral today', 'hospice referral');
    expect(segments).toEqual([
      { text: 'started ', highlighted: false },
      { text: 'hospice referral', highlighted: true },
      { text: ' today', highlighted: false },
    ]);
  });

  it('highlighted text equals the surface text exactly', () => {
    const segments = highlightSegments('Reports SOB at rest', 'SOB');
    const highlighted = segments.filter((s) => s.highlighted);
    expect(highlighted).toHaveLength(1);
    expect(highlighted[0].text).toBe('SOB');
  });

  it('handles a match at the start', () => {
    const segments = highlightSegments('SOB noted', 'SOB');
    expect(segments[0]).toEqual({ text: 'SOB', highlighted: true });
    expect(segments).toHaveLength(2);
  });

  it('handles a match spanning the whole context', () => {
    expect(highlightSegments('mets', 'mets')).toEqual([{ text: 'mets', highlighted: true }]);
  });

  it('reassembles to the original context', () => {
    const context = 'pt c/o sob overnight, worse when supine';
    const joined = highlightSegments(context, 'sob').map((s) => s.text).join('');
    expect(joined).toBe(context);
  });

  it('falls back to no highlight when the surface is absent', () => {
    expect(highlightSegments('nothing here', 'sob')).toEqual([
      { text: 'nothing here', highlighted: false },
    ]);
  });

  it('falls back to case-insensitive matching', () => {
    const segments = highlightSegments('severe Sob tonight', 'sob');
    expect(segments.find((s) => s.highlighted)?.text).toBe('Sob');
  });
});
