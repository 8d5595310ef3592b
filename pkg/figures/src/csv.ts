// CSV reading with strict schema validation against the documented vpblab
// column orders. Errors name the offending column or line.

import { readFileSync } from 'fs'

export type Table = { columns: string[]; rows: number[][] }

export const DECAY_COLUMNS = ['epsilon', 'time', 'energy', 'plain_energy']
export const BRANCH_COLUMNS = [
  'epsilon', 's', 'j', 're_lambda', 'im_lambda', 'fit_c_re', 'fit_c_im', 'residual',
]
export const RATE_COLUMNS = [
  'epsilon', 'ell', 'time_avg_err', 'integrated_err', 'perp_budget', 'decay_rate',
]

export class SchemaError extends Error {}

export function parseCsv(text: string, expected: string[]): Table {
  const lines = text.trim().split(/\r?\n/)
  if (lines.length === 0 || lines[0].trim() === '') {
    throw new SchemaError('empty CSV input')
  }
  const columns = lines[0].split(',').map((c) => c.trim())
  for (let i = 0; i < expected.length; i++) {
    if (columns[i] !== expected[i]) {
      throw new SchemaError(
        `column ${i + 1} is ${JSON.stringify(columns[i] ?? null)}, expected "${expected[i]}"`,
      )
    }
  }
  if (columns.length !== expected.length) {
    throw new SchemaError(
      `expected ${expected.length} columns, found ${columns.length}`,
    )
  }
  const rows: number[][] = []
  for (let ln = 1; ln < lines.length; ln++) {
    if (lines[ln].trim() === '') continue
    const parts = lines[ln].split(',')
    if (parts.length !== columns.length) {
      throw new SchemaError(`line ${ln + 1}: ${parts.length} fields for ${columns.length} columns`)
    }
    const row = parts.map((p, i) => {
      const v = Number(p)
      if (!Number.isFinite(v)) {
        throw new SchemaError(`line ${ln + 1}: column "${columns[i]}" is not a finite number: ${p}`)
      }
      return v
    })
    rows.push(row)
  }
  if (rows.length === 0) {
    throw new SchemaError('no data rows (empty series)')
  }
  return { columns, rows }
}

export function loadCsv(path: string, expected: string[]): Table {
  return parseCsv(readFileSync(path, 'utf8'), expected)
}

export function column(t: Table, name: string): number[] {
  const i = t.columns.indexOf(name)
  if (i < 0) throw new SchemaError(`missing column "${name}"`)
  return t.rows.map((r) => r[i])
}

export function groupBy(t: Table, name: string): Map<number, number[][]> {
  const i = t.columns.indexOf(name)
  if (i < 0) throw new SchemaError(`missing column "${name}"`)
  const out = new Map<number, number[][]>()
  for (const r of t.rows) {
    const k = r[i]
    if (!out.has(k)) out.set(k, [])
    out.get(k)!.push(r)
  }
  return out
}
