/**
 * Command line entry: pick a figure kind, point it at artifact directories,
 * get an SVG file. Exit code 2 flags bad input (unknown kind, missing
 * columns, malformed artifact), mirroring the simulator CLI's convention.
 */
import { writeFileSync } from 'fs';
import yargs from 'yargs';
import { FIGURE_KINDS, FigureKind, render } from './render';

const args = yargs(process.argv.slice(2))
  .usage('$0 --kind <figure> --artifact <dir> [--artifact <dir> ...] --out <file.svg>')
  .option('kind', {
    type: 'string',
    choices: FIGURE_KINDS as unknown as string[],
    demandOption: true,
    describe: 'which figure to draw',
  })
  .option('artifact', {
    type: 'string',
    array: true,
    demandOption: true,
    describe: 'run artifact directory (repeat for err-vs-t overlays)',
  })
  .option('out', {
    type: 'string',
    demandOption: true,
    describe: 'output SVG path',
  })
  .option('spins', {
    type: 'string',
    default: '',
    describe: 'comma separated 1-based spin indices (default: all)',
  })
  .strict()
  .help()
  .parseSync();

try {
  const svg = render({
    kind: args.kind as FigureKind,
    artifactDirs: args.artifact,
    spins: args.spins,
  });
  writeFileSync(args.out, svg);
  console.log(`wrote ${args.out} (${svg.length} bytes, ${args.kind})`);
} catch (e) {
  console.error(`error: ${e instanceof Error ? e.message : e}`);
  process.exit(2);
}
