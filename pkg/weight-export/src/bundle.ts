/**
 * The "SRQEWGT1" weight bundle format.
 *
 * magic (8 bytes) | u32 LE tensor count | per tensor:
 * u16 LE name length, UTF-8 name, u8 ndim, ndim x u32 LE dims,
 * row-major f32 LE payload.
 */

import { createHash } from 'node:crypto';

export const MAGIC = Buffer.from('SRQEWGT1', 'ascii');

export interface Tensor {
  shape: number[];
  /** Row-major values; serialized as f32 little-endian. */
  data: Float32Array;
}

export type TensorMap = Map<string, Tensor>;

export function tensorElementCount(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}

export function encodeBundle(tensors: TensorMap): Buffer {
  const parts: Buffer[] = [MAGIC];
  const count = Buffer.alloc(4);
  count.writeUInt32LE(tensors.size, 0);
  parts.push(count);
  for (const [name, tensor] of tensors) {
    if (tensorElementCount(tensor.shape) !== tensor.data.length) {
      throw new Error(`tensor ${name} shape/${tensor.data.length} size mismatch`);
    }
    const nameBytes = Buffer.from(name, 'utf-8');
    const head = Buffer.alloc(2 + nameBytes.length + 1 + 4 * tensor.shape.length);
    let offset = 0;
    head.writeUInt16LE(nameBytes.length, offset);
    offset += 2;
    nameBytes.copy(head, offset);
    offset += nameBytes.length;
    head.writeUInt8(tensor.shape.length, offset);
    offset += 1;
    for (const dim of tensor.shape) {
      head.writeUInt32LE(dim, offset);
      offset += 4;
    }
    const payload = Buffer.alloc(4 * tensor.data.length);
    for (let i = 0; i < tensor.data.length; i++) {
      payload.writeFloatLE(tensor.data[i], 4 * i);
    }
    parts.push(head, payload);
  }
  return Buffer.concat(parts);
}

export function decodeBundle(blob: Buffer): TensorMap {
  if (blob.length < 12 || !blob.subarray(0, 8).equals(MAGIC)) {
    throw new Error('not a weight bundle (bad magic)');
  }
  let offset = 8;
  const need = (n: number) => {
    if (offset + n > blob.length) {
      throw new Error('truncated weight bundle');
    }
  };
  need(4);
  const count = blob.readUInt32LE(offset);
  offset += 4;
  const tensors: TensorMap = new Map();
  for (let t = 0; t < count; t++) {
    need(2);
    const nameLength = blob.readUInt16LE(offset);
    offset += 2;
    need(nameLength + 1);
    const name = blob.subarray(offset, offset + nameLength).toString('utf-8');
    offset += nameLength;
    const ndim = blob.readUInt8(offset);
    offset += 1;
    need(4 * ndim);
    const shape: number[] = [];
    for (let d = 0; d < ndim; d++) {
      shape.push(blob.readUInt32LE(offset));
      offset += 4;
    }
    const elements = tensorElementCount(shape);
    need(4 * elements);
    const data = new Float32Array(elements);
    for (let i = 0; i < elements; i++) {
      data[i] = blob.readFloatLE(offset + 4 * i);
    }
    offset += 4 * elements;
    tensors.set(name, { shape, data });
  }
  return tensors;
}

export function sha256Hex(blob: Buffer): string {
  return createHash('sha256').update(blob).digest('hex');
}
