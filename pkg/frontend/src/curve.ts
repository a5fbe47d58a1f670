// SVG rendering of one patient's survival curve over calendar time.

import type { Curve } from './api.js';
import { dateTicks, polylinePath, probabilitiesValid, probabilityScale, timeScale } from './scale.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export const PLOT = {
  width: 860,
  height: 360,
  left: 56,
  right: 24,
  top: 18,
  bottom: 44,
};

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

export type CurveCallbacks = {
  onSelectPoint: (index: number) => void;
};

export function renderCurve(
  container: HTMLElement,
  curve: Curve,
  selectedIndex: number | null,
  callbacks: CurveCallbacks,
): void {
  container.textContent = '';

  if (curve.points.length === 0) {
    const empty = document.createElement('p');
    empty.className = 'empty-note';
    empty.textContent = 'no visits recorded for this patient';
    container.appendChild(empty);
    return;
  }

  const probs = curve.points.map((p) => p.probability);
  if (!probabilitiesValid(probs)) {
    // out-of-range probabilities are an error state, never clamped away
    const bad = document.createElement('p');
    bad.className = 'error-note';
    bad.setAttribute('data-error', 'probability-out-of-range');
    bad.textContent = 'error: the service returned a probability outside [0, 1]';
    container.appendChild(bad);
    return;
  }

  const svg = svgEl('svg', {
    viewBox: `0 0 ${PLOT.width} ${PLOT.height}`,
    width: '100%',
    role: 'img',
    'aria-label': `survival curve for ${curve.patient_id}`,
  });

  const dates = curve.points.map((p) => p.date);
  const x = timeScale(dates, [PLOT.left, PLOT.width - PLOT.right]);
  const y = probabilityScale([PLOT.height - PLOT.bottom, PLOT.top]);

  // horizontal gridlines with probability labels
  for (const level of [0, 0.25, 0.5, 0.75, 1]) {
    const py = y(level);
    svg.appendChild(svgEl('line', {
      x1: String(PLOT.left), x2: String(PLOT.width - PLOT.right),
      y1: py.toFixed(1), y2: py.toFixed(1), class: 'gridline',
    }));
    const label = svgEl('text', {
      x: String(PLOT.left - 8), y: (py + 4).toFixed(1),
      'text-anchor': 'end', class: 'axis-label',
    });
    label.textContent = level.toFixed(2);
    svg.appendChild(label);
  }

  // x-axis date ticks
  for (const tick of dateTicks(dates)) {
    const px = x(tick);
    svg.appendChild(svgEl('line', {
      x1: px.toFixed(1), x2: px.toFixed(1),
      y1: String(PLOT.height - PLOT.bottom), y2: String(PLOT.height - PLOT.bottom + 6),
      class: 'tick',
    }));
    const label = svgEl('text', {
      x: px.toFixed(1), y: String(PLOT.height - PLOT.bottom + 22),
      'text-anchor': 'middle', class: 'axis-label',
    });
    label.textContent = tick;
    svg.appendChild(label);
  }

  const xs = dates.map((d) => x(d));
  const ys = probs.map((p) => y(p));
  if (curve.points.length > 1) {
    svg.appendChild(svgEl('path', { d: polylinePath(xs, ys), class: 'curve-line' }));
  }

  curve.points.forEach((point, index) => {
    const marker = svgEl('circle', {
      cx: xs[index].toFixed(1),
      cy: ys[index].toFixed(1),
      r: '6',
      class: index === selectedIndex ? 'marker selected' : 'marker',
      'data-index': String(index),
      'data-date': point.date,
      'data-probability': String(point.probability),
      tabindex: '0',
      role: 'button',
      'aria-label': `visit ${point.date}, probability ${point.probability.toFixed(3)}`,
    });
    marker.addEventListener('click', () => callbacks.onSelectPoint(index));
    marker.addEventListener('keydown', (event) => {
      if ((event as KeyboardEvent).key === 'Enter') callbacks.onSelectPoint(index);
    });
    const title = svgEl('title', {});
    title.textContent = `${point.date} - p=${point.probability.toFixed(3)} (${point.note_types.join(', ')})`;
    marker.appendChild(title);
    svg.appendChild(marker);
  });

  container.appendChild(svg);
}
