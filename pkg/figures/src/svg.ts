// Minimal deterministic SVG plotting: fixed canvas, numeric formatting with a
// fixed precision, no timestamps or random ids, so identical inputs give
// byte-identical files.

export type Scale = 'linear' | 'log'

export interface Axis {
  label: string
  scale: Scale
  min: number
  max: number
}

const W = 640
const H = 440
const ML = 70
const MR = 20
const MT = 36
const MB = 52

export const PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b']

function fmt(x: number): string {
  if (!Number.isFinite(x)) return '0'
  return x.toFixed(3)
}

export function niceTicks(min: number, max: number, scale: Scale): number[] {
  if (scale === 'log') {
    const lo = Math.ceil(Math.log10(min) - 1e-9)
    const hi = Math.floor(Math.log10(max) + 1e-9)
    const out: number[] = []
    for (let e = lo; e <= hi; e++) out.push(Math.pow(10, e))
    if (out.length === 0) out.push(min, max)
    return out
  }
  const span = max - min || 1
  const step = Math.pow(10, Math.floor(Math.log10(span / 4)))
  const mult = span / step > 8 ? 2 : 1
  const out: number[] = []
  const start = Math.ceil(min / (step * mult)) * step * mult
  for (let v = start; v <= max + 1e-12 * span; v += step * mult) out.push(v)
  return out
}

export class Plot {
  private parts: string[] = []
  constructor(readonly title: string, readonly x: Axis, readonly y: Axis) {}

  private tx(v: number): number {
    const { min, max, scale } = this.x
    const f = scale === 'log'
      ? (Math.log(v) - Math.log(min)) / (Math.log(max) - Math.log(min))
      : (v - min) / (max - min || 1)
    return ML + f * (W - ML - MR)
  }

  private ty(v: number): number {
    const { min, max, scale } = this.y
    const f = scale === 'log'
      ? (Math.log(v) - Math.log(min)) / (Math.log(max) - Math.log(min))
      : (v - min) / (max - min || 1)
    return H - MB - f * (H - MT - MB)
  }

  polyline(xs: number[], ys: number[], color: string, dashed = false): void {
    const pts = xs.map((x, i) => `${fmt(this.tx(x))},${fmt(this.ty(ys[i]))}`).join(' ')
    const dash = dashed ? ' stroke-dasharray="6,4"' : ''
    this.parts.push(`<polyline fill="none" stroke="${color}" stroke-width="1.5"${dash} points="${pts}"/>`)
  }

  scatter(xs: number[], ys: number[], color: string, r = 3): void {
    for (let i = 0; i < xs.length; i++) {
      this.parts.push(
        `<circle cx="${fmt(this.tx(xs[i]))}" cy="${fmt(this.ty(ys[i]))}" r="${r}" fill="${color}"/>`,
      )
    }
  }

  legend(entries: { label: string; color: string }[]): void {
    entries.forEach((e, i) => {
      const y = MT + 14 + 16 * i
      this.parts.push(`<rect x="${W - MR - 150}" y="${y - 9}" width="12" height="3" fill="${e.color}"/>`)
      this.parts.push(`<text x="${W - MR - 132}" y="${y}" font-size="11">${escapeXml(e.label)}</text>`)
    })
  }

  render(): string {
    const out: string[] = []
    out.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`)
    out.push(`<rect width="${W}" height="${H}" fill="white"/>`)
    out.push(`<text x="${W / 2}" y="20" text-anchor="middle" font-size="14">${escapeXml(this.title)}</text>`)
    // frame
    out.push(`<rect x="${ML}" y="${MT}" width="${W - ML - MR}" height="${H - MT - MB}" fill="none" stroke="#444"/>`)
    for (const t of niceTicks(this.x.min, this.x.max, this.x.scale)) {
      if (t < this.x.min || t > this.x.max) continue
      const px = this.tx(t)
      out.push(`<line x1="${fmt(px)}" y1="${H - MB}" x2="${fmt(px)}" y2="${H - MB + 5}" stroke="#444"/>`)
      out.push(`<text x="${fmt(px)}" y="${H - MB + 18}" text-anchor="middle" font-size="10">${tickLabel(t, this.x.scale)}</text>`)
    }
    for (const t of niceTicks(this.y.min, this.y.max, this.y.scale)) {
      if (t < this.y.min || t > this.y.max) continue
      const py = this.ty(t)
      out.push(`<line x1="${ML - 5}" y1="${fmt(py)}" x2="${ML}" y2="${fmt(py)}" stroke="#444"/>`)
      out.push(`<text x="${ML - 8}" y="${fmt(py + 3)}" text-anchor="end" font-size="10">${tickLabel(t, this.y.scale)}</text>`)
    }
    out.push(`<text x="${W / 2}" y="${H - 14}" text-anchor="middle" font-size="12">${escapeXml(this.x.label)}</text>`)
    out.push(`<text x="16" y="${H / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 16 ${H / 2})">${escapeXml(this.y.label)}</text>`)
    out.push(...this.parts)
    out.push('</svg>')
    return out.join('\n') + '\n'
  }
}

function tickLabel(v: number, scale: Scale): string {
  if (scale === 'log') {
    const e = Math.round(Math.log10(v))
    return `1e${e}`
  }
  if (Math.abs(v) >= 1000 || (Math.abs(v) < 0.01 && v !== 0)) return v.toExponential(0)
  return String(Math.round(v * 1000) / 1000)
}

function escapeXml(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;')
}

export function range(values: number[], scale: Scale, padFrac = 0.05): { min: number; max: number } {
  let min = Math.min(...values)
  let max = Math.max(...values)
  if (scale === 'log') {
    min = Math.max(min, 1e-300)
    max = Math.max(max, min * 10)
    const f = Math.pow(max / min, padFrac)
    return { min: min / f, max: max * f }
  }
  const pad = (max - min || 1) * padFrac
  return { min: min - pad, max: max + pad }
}

export function spansDecades(values: number[], decades = 2): boolean {
  const pos = values.filter((v) => v > 0)
  if (pos.length < 2) return false
  return Math.max(...pos) / Math.min(...pos) > Math.pow(10, decades)
}
