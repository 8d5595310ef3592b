// The three figure kinds, one function per kind. Each reads a CSV in the
// documented schema and returns deterministic SVG text; no numerical work
// beyond the fits already present in the tables.

import { BRANCH_COLUMNS, DECAY_COLUMNS, RATE_COLUMNS, Table, column, groupBy,
         loadCsv } from './csv.js'
import { PALETTE, Plot, range, spansDecades } from './svg.js'

export function decayFigure(t: Table): string {
  const energies = column(t, 'energy')
  const times = column(t, 'time')
  const yscale = spansDecades(energies) ? 'log' : 'linear'
  const plot = new Plot(
    'Energy functional decay',
    { label: 'time', scale: 'linear', ...range(times, 'linear') },
    { label: 'energy', scale: yscale, ...range(energies, yscale) },
  )
  const groups = [...groupBy(t, 'epsilon').entries()].sort((a, b) => b[0] - a[0])
  const legend: { label: string; color: string }[] = []
  groups.forEach(([eps, rows], i) => {
    const color = PALETTE[i % PALETTE.length]
    plot.polyline(rows.map((r) => r[1]), rows.map((r) => r[2]), color)
    legend.push({ label: `eps = ${eps}`, color })
  })
  plot.legend(legend)
  return plot.render()
}

export function branchesFigure(t: Table): string {
  const re = column(t, 're_lambda')
  const im = column(t, 'im_lambda')
  const plot = new Plot(
    'Eigenvalue branches in the complex plane',
    { label: 'Re(lambda)', scale: 'linear', ...range(re, 'linear') },
    { label: 'Im(lambda)', scale: 'linear', ...range(im, 'linear') },
  )
  const groups = [...groupBy(t, 'j').entries()].sort((a, b) => a[0] - b[0])
  const legend: { label: string; color: string }[] = []
  groups.forEach(([j, rows], i) => {
    const color = PALETTE[i % PALETTE.length]
    const byS = [...rows].sort((a, b) => a[1] - b[1])
    plot.scatter(byS.map((r) => r[3]), byS.map((r) => r[4]), color)
    // quadratic-fit overlay: lambda(0) + fit_c * s^2, sampled on the s grid
    const lam0im = j === 1 ? 1 : j === -1 ? -1 : 0
    const eps = byS[0][0]
    const fit = byS.map((r) => ({
      re: r[5] * r[1] * r[1],
      im: lam0im * eps + r[6] * r[1] * r[1],
    }))
    plot.polyline(fit.map((f) => f.re), fit.map((f) => f.im), color, true)
    legend.push({ label: `branch j = ${j}`, color })
  })
  plot.legend(legend)
  return plot.render()
}

export function ratesFigure(t: Table): string {
  const eps = column(t, 'epsilon')
  const fields: { name: string; idx: number }[] = [
    { name: 'integrated_err', idx: 3 },
    { name: 'time_avg_err', idx: 2 },
    { name: 'perp_budget', idx: 4 },
  ]
  const all = t.rows.flatMap((r) => fields.map((f) => r[f.idx])).filter((v) => v > 0)
  if (all.length === 0) throw new Error('rates figure needs positive error values')
  const plot = new Plot(
    'Convergence functionals vs eps (log-log, eps|ln eps| overlay dashed)',
    { label: 'eps', scale: 'log', ...range(eps, 'log') },
    { label: 'error functionals', scale: 'log', ...range(all, 'log') },
  )
  const order = eps.map((_, i) => i).sort((a, b) => eps[a] - eps[b])
  const se = order.map((i) => eps[i])
  const legend: { label: string; color: string }[] = []
  fields.forEach((f, k) => {
    const color = PALETTE[k % PALETTE.length]
    const ys = order.map((i) => t.rows[i][f.idx])
    plot.scatter(se, ys, color)
    plot.polyline(se, ys, color)
    legend.push({ label: f.name, color })
  })
  // eps|ln eps| guide anchored at the largest-eps integrated error
  const anchor = order[order.length - 1]
  const c = t.rows[anchor][3] / (eps[anchor] * Math.abs(Math.log(eps[anchor])))
  const guide = se.map((e) => c * e * Math.abs(Math.log(e)))
  plot.polyline(se, guide, '#444', true)
  legend.push({ label: 'C eps|ln eps|', color: '#444' })
  plot.legend(legend)
  return plot.render()
}

export type FigureKind = 'decay' | 'branches' | 'rates'

export function renderFigure(kind: FigureKind, csvPath: string): string {
  switch (kind) {
    case 'decay':
      return decayFigure(loadCsv(csvPath, DECAY_COLUMNS))
    case 'branches':
      return branchesFigure(loadCsv(csvPath, BRANCH_COLUMNS))
    case 'rates':
      return ratesFigure(loadCsv(csvPath, RATE_COLUMNS))
  }
}
