/**
 * Weight sources for the exporter.
 *
 * Two kinds are understood: a safetensors file holding the 13 feature-stack
 * convolutions (either torchvision "features.N.weight" names or the bundle's
 * own "convB_I.weight" names), and "synthetic:<seed>" which fabricates a
 * deterministic He-initialized stack for offline use and tests.
 */

import { readFileSync } from 'node:fs';

import { Tensor, TensorMap, sha256Hex, tensorElementCount } from './bundle';
import { XorShift32 } from './prng';
import { ALL_CONVS, TORCHVISION_FEATURE_INDICES, expectedShapes } from './topology';

export interface LoadedSource {
  tensors: TensorMap;
  sourceId: string;
  sourceSha256?: string;
}

export class MissingTensorError extends Error {
  constructor(public readonly tensorName: string) {
    super(`source is missing tensor ${tensorName}`);
  }
}

interface SafetensorsEntry {
  dtype: string;
  shape: number[];
  data_offsets: [number, number];
}

function parseSafetensors(blob: Buffer): Map<string, Tensor> {
  if (blob.length < 8) {
    throw new Error('truncated safetensors file');
  }
  const headerLength = Number(blob.readBigUInt64LE(0));
  if (8 + headerLength > blob.length) {
    throw new Error('truncated safetensors header');
  }
  const header = JSON.parse(blob.subarray(8, 8 + headerLength).toString('utf-8')) as {
    [name: string]: SafetensorsEntry;
  };
  const dataStart = 8 + headerLength;
  const tensors = new Map<string, Tensor>();
  for (const [name, entry] of Object.entries(header)) {
    if (name === '__metadata__') {
      continue;
    }
    const [start, end] = entry.data_offsets;
    const bytes = blob.subarray(dataStart + start, dataStart + end);
    const elements = tensorElementCount(entry.shape);
    const data = new Float32Array(elements);
    if (entry.dtype === 'F32') {
      for (let i = 0; i < elements; i++) {
        data[i] = bytes.readFloatLE(4 * i);
      }
    } else if (entry.dtype === 'F64') {
      for (let i = 0; i < elements; i++) {
        data[i] = bytes.readDoubleLE(8 * i);
      }
    } else {
      throw new Error(`tensor ${name}: unsupported dtype ${entry.dtype}`);
    }
    tensors.set(name, { shape: entry.shape, data });
  }
  return tensors;
}

/** Translate source names to the bundle's conv names, verifying shapes. */
function collectConvTensors(raw: Map<string, Tensor>): TensorMap {
  const shapes = expectedShapes();
  const out: TensorMap = new Map();
  for (const [index, conv] of ALL_CONVS.entries()) {
    const torchvisionBase = `features.${TORCHVISION_FEATURE_INDICES[index]}`;
    for (const kind of ['weight', 'bias'] as const) {
      const target = `${conv.name}.${kind}`;
      const candidate = raw.get(target) ?? raw.get(`${torchvisionBase}.${kind}`);
      if (candidate === undefined) {
        throw new MissingTensorError(target);
      }
      const expected = shapes[target];
      if (
        candidate.shape.length !== expected.length ||
        candidate.shape.some((dim, i) => dim !== expected[i])
      ) {
        throw new Error(
          `tensor ${target} has shape [${candidate.shape}], expected [${expected}]`
        );
      }
      out.set(target, candidate);
    }
  }
  return out;
}

function syntheticStack(seed: number): TensorMap {
  const rng = new XorShift32(seed);
  const out: TensorMap = new Map();
  for (const conv of ALL_CONVS) {
    const fanIn = conv.inChannels * 9;
    const std = Math.sqrt(2 / fanIn);
    const weight = new Float32Array(conv.outChannels * conv.inChannels * 9);
    for (let i = 0; i < weight.length; i++) {
      weight[i] = rng.nextNormal() * std;
    }
    const bias = new Float32Array(conv.outChannels);
    for (let i = 0; i < bias.length; i++) {
      bias[i] = rng.nextNormal() * 0.01;
    }
    out.set(`${conv.name}.weight`, {
      shape: [conv.outChannels, conv.inChannels, 3, 3],
      data: weight,
    });
    out.set(`${conv.name}.bias`, { shape: [conv.outChannels], data: bias });
  }
  return out;
}

export function loadSource(source: string): LoadedSource {
  if (source.startsWith('synthetic:')) {
    const seed = Number(source.slice('synthetic:'.length));
    return { tensors: syntheticStack(seed), sourceId: source };
  }
  const blob = readFileSync(source);
  return {
    tensors: collectConvTensors(parseSafetensors(blob)),
    sourceId: source,
    sourceSha256: sha256Hex(blob),
  };
}
