/** Tiny DOM helpers for the framework-free shell. */

export function h<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | ((ev: Event) => void)> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const el = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === 'function') {
      el.addEventListener(key.replace(/^on/, ''), value);
    } else if (key === 'class') {
      el.className = value;
    } else {
      el.setAttribute(key, value);
    }
  }
  el.append(...children);
  return el;
}

export function clear(el: HTMLElement): void {
  while (el.firstChild) el.removeChild(el.firstChild);
}

export function numberInput(
  label: string,
  value: number | null,
  onChange: (v: number | null) => void,
  step = 'any',
): HTMLElement {
  const input = h('input', { type: 'number', step });
  if (value !== null) input.value = String(value);
  input.addEventListener('change', () => {
    onChange(input.value === '' ? null : Number(input.value));
  });
  return h('label', { class: 'field' }, label, input);
}

export function textInput(
  label: string,
  value: string,
  onChange: (v: string) => void,
): HTMLElement {
  const input = h('input', { type: 'text' });
  input.value = value;
  input.addEventListener('change', () => onChange(input.value));
  return h('label', { class: 'field' }, label, input);
}

export function selectInput(
  label: string,
  options: string[],
  value: string,
  onChange: (v: string) => void,
): HTMLElement {
  const select = h('select', {});
  for (const opt of options) {
    const o = h('option', { value: opt }, opt);
    if (opt === value) o.setAttribute('selected', 'selected');
    select.append(o);
  }
  select.addEventListener('change', () => onChange(select.value));
  return h('label', { class: 'field' }, label, select);
}

export function checkboxInput(
  label: string,
  value: boolean,
  onChange: (v: boolean) => void,
): HTMLElement {
  const input = h('input', { type: 'checkbox' });
  input.checked = value;
  input.addEventListener('change', () => onChange(input.checked));
  return h('label', { class: 'field checkbox' }, input, label);
}

export function svgContainer(svg: string): HTMLElement {
  const div = h('div', { class: 'plot' });
  div.innerHTML = svg;
  return div;
}

/** Stringify a payload number exactly as JavaScript renders it. */
export function fmt(value: number | boolean | string | null | undefined): string {
  if (value === null || value === undefined) return '—';
  return String(value);
}
