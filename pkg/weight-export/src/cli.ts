#!/usr/bin/env node
/**
 * Export pretrained VGG16 feature-stack weights into the SRQEWGT1 bundle.
 *
 * Usage:
 *   node dist/src/cli.js export --source <weights.safetensors | synthetic:SEED>
 *       --out weights.srqe [--manifest manifest.json]
 *       [--fixture fixture.json] [--fixture-seed N] [--fixture-size 64]
 *
 * The safetensors source accepts torchvision naming (features.N.weight) or
 * the bundle's own conv names. Download example (done separately, needs
 * network): save `vgg16(weights=IMAGENET1K_V1).features.state_dict()` as a
 * safetensors file.
 */

import { writeFileSync } from 'node:fs';

import { encodeBundle, sha256Hex } from './bundle';
import { buildFixture } from './fixture';
import { MissingTensorError, loadSource } from './source';
import { NORMALIZE_MEAN, NORMALIZE_STD } from './topology';

interface Options {
  [flag: string]: string;
}

function parseArgs(argv: string[]): { command: string; options: Options } {
  const [command, ...rest] = argv;
  const options: Options = {};
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (!flag.startsWith('--') || value === undefined) {
      throw new Error(`malformed arguments near ${flag}`);
    }
    options[flag.slice(2)] = value;
  }
  return { command: command ?? '', options };
}

export function runExport(options: Options): void {
  const source = options['source'];
  const outPath = options['out'];
  if (!source || !outPath) {
    throw new Error('export requires --source and --out');
  }
  const loaded = loadSource(source);
  const blob = encodeBundle(loaded.tensors);
  writeFileSync(outPath, blob);
  const weightsSha = sha256Hex(blob);
  console.log(`wrote ${loaded.tensors.size} tensors to ${outPath} (sha256 ${weightsSha})`);

  let fixtureSha: string | undefined;
  if (options['fixture']) {
    const seed = Number(options['fixture-seed'] ?? 4242);
    const size = Number(options['fixture-size'] ?? 64);
    const fixture = buildFixture(loaded.tensors, seed, size);
    const encoded = JSON.stringify(fixture, null, 2) + '\n';
    writeFileSync(options['fixture'], encoded);
    fixtureSha = sha256Hex(Buffer.from(encoded, 'utf-8'));
    console.log(`wrote fixture (seed ${seed}, ${size}x${size}) to ${options['fixture']}`);
  }

  if (options['manifest']) {
    const manifest = {
      source: loaded.sourceId,
      source_sha256: loaded.sourceSha256 ?? null,
      weights_file: outPath,
      weights_sha256: weightsSha,
      tensor_count: loaded.tensors.size,
      tensors: [...loaded.tensors.entries()].map(([name, tensor]) => ({
        name,
        shape: tensor.shape,
      })),
      normalization: { mean: NORMALIZE_MEAN, std: NORMALIZE_STD },
      fixture_sha256: fixtureSha ?? null,
    };
    writeFileSync(options['manifest'], JSON.stringify(manifest, null, 2) + '\n');
    console.log(`wrote manifest to ${options['manifest']}`);
  }
}

export function main(argv: string[]): number {
  try {
    const { command, options } = parseArgs(argv);
    if (command !== 'export') {
      console.error('usage: cli.js export --source <path|synthetic:SEED> --out <file> [--manifest m.json] [--fixture f.json] [--fixture-seed N] [--fixture-size 64]');
      return command === '' || command === 'help' || command === '--help' ? 0 : 1;
    }
    runExport(options);
    return 0;
  } catch (error) {
    if (error instanceof MissingTensorError) {
      console.error(`export error: ${error.message}`);
    } else {
      console.error(`error: ${(error as Error).message}`);
    }
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
