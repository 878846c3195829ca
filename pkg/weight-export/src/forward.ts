/**
 * Reference forward pass used only to stamp fixture activations.
 *
 * Mirrors the scoring engine's semantics exactly: channel standardization
 * once, 3x3 zero-padded convolutions, rectification, and 2x2 max pooling
 * between blocks, tapping the last rectified convolution of each block.
 * Double precision throughout; clarity over speed.
 */

import { TensorMap } from './bundle';
import { NORMALIZE_MEAN, NORMALIZE_STD, VGG16_BLOCKS } from './topology';

export interface FeatureMap {
  channels: number;
  height: number;
  width: number;
  /** Channel-major (C, H, W) row-major values. */
  data: Float64Array;
}

/** Standardize an H x W x 3 [0,1] image into a (3, H, W) feature map. */
export function preprocess(image: Float64Array, height: number, width: number): FeatureMap {
  const data = new Float64Array(3 * height * width);
  for (let c = 0; c < 3; c++) {
    const mean = NORMALIZE_MEAN[c];
    const std = NORMALIZE_STD[c];
    for (let y = 0; y < height; y++) {
      for (let x = 0; x < width; x++) {
        data[(c * height + y) * width + x] = (image[(y * width + x) * 3 + c] - mean) / std;
      }
    }
  }
  return { channels: 3, height, width, data };
}

function convRelu(input: FeatureMap, weight: Float64Array, bias: Float64Array, outChannels: number): FeatureMap {
  const { channels, height, width } = input;
  const out = new Float64Array(outChannels * height * width);
  for (let o = 0; o < outChannels; o++) {
    for (let y = 0; y < height; y++) {
      for (let x = 0; x < width; x++) {
        let acc = bias[o];
        for (let c = 0; c < channels; c++) {
          const wBase = ((o * channels + c) * 3) * 3;
          const inBase = (c * height + y) * width + x;
          for (let dy = -1; dy <= 1; dy++) {
            const yy = y + dy;
            if (yy < 0 || yy >= height) {
              continue;
            }
            for (let dx = -1; dx <= 1; dx++) {
              const xx = x + dx;
              if (xx < 0 || xx >= width) {
                continue;
              }
              acc += weight[wBase + (dy + 1) * 3 + (dx + 1)] * input.data[inBase + dy * width + dx];
            }
          }
        }
        out[(o * height + y) * width + x] = acc > 0 ? acc : 0;
      }
    }
  }
  return { channels: outChannels, height, width, data: out };
}

function maxPool2(input: FeatureMap): FeatureMap {
  const { channels, height, width } = input;
  const outHeight = Math.floor(height / 2);
  const outWidth = Math.floor(width / 2);
  const out = new Float64Array(channels * outHeight * outWidth);
  for (let c = 0; c < channels; c++) {
    for (let y = 0; y < outHeight; y++) {
      for (let x = 0; x < outWidth; x++) {
        const base = (c * height + 2 * y) * width + 2 * x;
        const a = input.data[base];
        const b = input.data[base + 1];
        const d = input.data[base + width];
        const e = input.data[base + width + 1];
        out[(c * outHeight + y) * outWidth + x] = Math.max(a, b, d, e);
      }
    }
  }
  return { channels, height: outHeight, width: outWidth, data: out };
}

function toFloat64(data: Float32Array): Float64Array {
  const out = new Float64Array(data.length);
  for (let i = 0; i < data.length; i++) {
    out[i] = data[i];
  }
  return out;
}

/** Mean activation of each of the five block taps. */
export function layerMeanActivations(
  tensors: TensorMap,
  image: Float64Array,
  height: number,
  width: number
): number[] {
  let current = preprocess(image, height, width);
  const means: number[] = [];
  for (const [blockIndex, block] of VGG16_BLOCKS.entries()) {
    for (const conv of block) {
      const weight = tensors.get(`${conv.name}.weight`);
      const bias = tensors.get(`${conv.name}.bias`);
      if (weight === undefined || bias === undefined) {
        throw new Error(`bundle is missing tensors for ${conv.name}`);
      }
      current = convRelu(current, toFloat64(weight.data), toFloat64(bias.data), conv.outChannels);
    }
    let sum = 0;
    for (let i = 0; i < current.data.length; i++) {
      sum += current.data[i];
    }
    means.push(sum / current.data.length);
    if (blockIndex < VGG16_BLOCKS.length - 1) {
      current = maxPool2(current);
    }
  }
  return means;
}
