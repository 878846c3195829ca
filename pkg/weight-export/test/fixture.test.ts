import assert from 'node:assert/strict';
import { execFileSync } from 'node:child_process';
import { mkdtempSync, readFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { test } from 'node:test';

import { decodeBundle } from '../src/bundle';
import { buildFixture } from '../src/fixture';
import { loadSource } from '../src/source';

test('fixture carries five layer means and a stable stamp', () => {
  const { tensors } = loadSource('synthetic:7');
  const first = buildFixture(tensors, 4242, 16);
  const second = buildFixture(tensors, 4242, 16);
  assert.equal(first.layer_means.length, 5);
  assert.deepEqual(first.layer_means, second.layer_means);
  assert.equal(first.generator, 'xorshift32');
  assert.ok(first.layer_means.every(Number.isFinite));
});

test('cli export writes identical files on repeated runs', () => {
  const dir = mkdtempSync(join(tmpdir(), 'wexp-cli-'));
  const cli = join(__dirname, '..', 'src', 'cli.js');
  const argsFor = (tag: string) => [
    cli,
    'export',
    '--source', 'synthetic:55',
    '--out', join(dir, `w${tag}.srqe`),
    '--manifest', join(dir, `m${tag}.json`),
    '--fixture', join(dir, `f${tag}.json`),
    '--fixture-seed', '99',
    '--fixture-size', '16',
  ];
  execFileSync(process.execPath, argsFor('A'));
  execFileSync(process.execPath, argsFor('B'));
  assert.deepEqual(readFileSync(join(dir, 'wA.srqe')), readFileSync(join(dir, 'wB.srqe')));
  assert.equal(
    readFileSync(join(dir, 'fA.json'), 'utf-8'),
    readFileSync(join(dir, 'fB.json'), 'utf-8')
  );

  const manifest = JSON.parse(readFileSync(join(dir, 'mA.json'), 'utf-8'));
  assert.equal(manifest.tensor_count, 26);
  assert.equal(manifest.tensors.length, 26);
  const first = manifest.tensors.find((t: { name: string }) => t.name === 'conv1_1.weight');
  assert.deepEqual(first.shape, [64, 3, 3, 3]);

  const bundle = decodeBundle(readFileSync(join(dir, 'wA.srqe')));
  assert.equal(bundle.size, 26);

  const fixture = JSON.parse(readFileSync(join(dir, 'fA.json'), 'utf-8'));
  assert.equal(fixture.seed, 99);
  assert.equal(fixture.layer_means.length, 5);
});
