/**
 * Reference-activation fixtures: a deterministic pseudo-random input plus
 * the five tap-point mean activations under a given weight bundle. A
 * consuming engine proves weight-file compatibility by reproducing every
 * mean within 1e-4 relative error.
 */

import { TensorMap } from './bundle';
import { layerMeanActivations } from './forward';
import { fixtureInput } from './prng';
import { NORMALIZE_MEAN, NORMALIZE_STD } from './topology';

export interface Fixture {
  generator: 'xorshift32';
  seed: number;
  height: number;
  width: number;
  channels: 3;
  order: 'row-major HWC';
  range: '[0,1)';
  normalization: { mean: number[]; std: number[] };
  layer_means: number[];
  tolerance_rel: number;
}

export function buildFixture(tensors: TensorMap, seed: number, size = 64): Fixture {
  const image = fixtureInput(seed, size, size);
  return {
    generator: 'xorshift32',
    seed,
    height: size,
    width: size,
    channels: 3,
    order: 'row-major HWC',
    range: '[0,1)',
    normalization: { mean: [...NORMALIZE_MEAN], std: [...NORMALIZE_STD] },
    layer_means: layerMeanActivations(tensors, image, size, size),
    tolerance_rel: 1e-4,
  };
}
