import assert from 'node:assert/strict';
import { mkdtempSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { test } from 'node:test';

import { encodeBundle, sha256Hex, Tensor } from '../src/bundle';
import { MissingTensorError, loadSource } from '../src/source';
import { ALL_CONVS, TORCHVISION_FEATURE_INDICES, expectedShapes } from '../src/topology';

function writeSafetensors(path: string, tensors: Map<string, Tensor>): void {
  const header: { [name: string]: object } = {};
  let offset = 0;
  const payloads: Buffer[] = [];
  for (const [name, tensor] of tensors) {
    const bytes = Buffer.alloc(4 * tensor.data.length);
    for (let i = 0; i < tensor.data.length; i++) {
      bytes.writeFloatLE(tensor.data[i], 4 * i);
    }
    header[name] = {
      dtype: 'F32',
      shape: tensor.shape,
      data_offsets: [offset, offset + bytes.length],
    };
    offset += bytes.length;
    payloads.push(bytes);
  }
  const headerBytes = Buffer.from(JSON.stringify(header), 'utf-8');
  const lengthPrefix = Buffer.alloc(8);
  lengthPrefix.writeBigUInt64LE(BigInt(headerBytes.length), 0);
  writeFileSync(path, Buffer.concat([lengthPrefix, headerBytes, ...payloads]));
}

function torchvisionStyleTensors(): Map<string, Tensor> {
  const shapes = expectedShapes();
  const out = new Map<string, Tensor>();
  ALL_CONVS.forEach((conv, index) => {
    const base = `features.${TORCHVISION_FEATURE_INDICES[index]}`;
    for (const kind of ['weight', 'bias'] as const) {
      const shape = shapes[`${conv.name}.${kind}`];
      const elements = shape.reduce((a, b) => a * b, 1);
      const data = new Float32Array(elements);
      for (let i = 0; i < elements; i++) {
        data[i] = ((index * 31 + i) % 17) / 17 - 0.5;
      }
      out.set(`${base}.${kind}`, { shape, data });
    }
  });
  return out;
}

test('synthetic source is deterministic and complete', () => {
  const a = loadSource('synthetic:99');
  const b = loadSource('synthetic:99');
  assert.equal(a.tensors.size, 26);
  assert.equal(sha256Hex(encodeBundle(a.tensors)), sha256Hex(encodeBundle(b.tensors)));
  const shapes = expectedShapes();
  for (const [name, tensor] of a.tensors) {
    assert.deepEqual(tensor.shape, shapes[name]);
  }
  const c = loadSource('synthetic:100');
  assert.notEqual(sha256Hex(encodeBundle(a.tensors)), sha256Hex(encodeBundle(c.tensors)));
});

test('safetensors source with torchvision names is translated', () => {
  const dir = mkdtempSync(join(tmpdir(), 'wexp-'));
  const path = join(dir, 'vgg16.safetensors');
  writeSafetensors(path, torchvisionStyleTensors());
  const loaded = loadSource(path);
  assert.equal(loaded.tensors.size, 26);
  assert.ok(loaded.tensors.has('conv1_1.weight'));
  assert.ok(loaded.tensors.has('conv5_3.bias'));
  assert.ok(loaded.sourceSha256 && loaded.sourceSha256.length === 64);
});

test('a missing tensor is reported by name', () => {
  const dir = mkdtempSync(join(tmpdir(), 'wexp-'));
  const path = join(dir, 'partial.safetensors');
  const tensors = torchvisionStyleTensors();
  tensors.delete('features.19.weight'); // conv4_2.weight
  writeSafetensors(path, tensors);
  assert.throws(
    () => loadSource(path),
    (error: unknown) =>
      error instanceof MissingTensorError && error.tensorName === 'conv4_2.weight'
  );
});

test('shape mismatches are rejected', () => {
  const dir = mkdtempSync(join(tmpdir(), 'wexp-'));
  const path = join(dir, 'bad-shape.safetensors');
  const tensors = torchvisionStyleTensors();
  tensors.set('features.0.weight', { shape: [64, 3, 5, 5], data: new Float32Array(64 * 3 * 25) });
  writeSafetensors(path, tensors);
  assert.throws(() => loadSource(path), /expected \[64,3,3,3\]/);
});
