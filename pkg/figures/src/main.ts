// Usage: node dist/main.js <decay|branches|rates> <input.csv> <output.svg>

import { writeFileSync } from 'fs'
import { SchemaError } from './csv.js'
import { FigureKind, renderFigure } from './figures.js'

const KINDS = ['decay', 'branches', 'rates']

function main(argv: string[]): number {
  const [kind, input, output] = argv
  if (!kind || !input || !output || !KINDS.includes(kind)) {
    console.error(`usage: main.js <${KINDS.join('|')}> <input.csv> <output.svg>`)
    return 2
  }
  try {
    const svg = renderFigure(kind as FigureKind, input)
    writeFileSync(output, svg)
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${(err as Error).message}`)
      return 2
    }
    console.error(`error: ${(err as Error).message}`)
    return 1
  }
  console.log(`wrote ${output}`)
  return 0
}

process.exit(main(process.argv.slice(2)))
