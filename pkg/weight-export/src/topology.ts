/** Fixed VGG16 feature-stack topology and preprocessing constants. */

export interface ConvSpec {
  /** Bundle-format tensor base name, e.g. "conv3_2". */
  name: string;
  inChannels: number;
  outChannels: number;
}

/** The 13 convolutions, grouped into the five pooled blocks. */
export const VGG16_BLOCKS: ConvSpec[][] = [
  [
    { name: 'conv1_1', inChannels: 3, outChannels: 64 },
    { name: 'conv1_2', inChannels: 64, outChannels: 64 },
  ],
  [
    { name: 'conv2_1', inChannels: 64, outChannels: 128 },
    { name: 'conv2_2', inChannels: 128, outChannels: 128 },
  ],
  [
    { name: 'conv3_1', inChannels: 128, outChannels: 256 },
    { name: 'conv3_2', inChannels: 256, outChannels: 256 },
    { name: 'conv3_3', inChannels: 256, outChannels: 256 },
  ],
  [
    { name: 'conv4_1', inChannels: 256, outChannels: 512 },
    { name: 'conv4_2', inChannels: 512, outChannels: 512 },
    { name: 'conv4_3', inChannels: 512, outChannels: 512 },
  ],
  [
    { name: 'conv5_1', inChannels: 512, outChannels: 512 },
    { name: 'conv5_2', inChannels: 512, outChannels: 512 },
    { name: 'conv5_3', inChannels: 512, outChannels: 512 },
  ],
];

export const ALL_CONVS: ConvSpec[] = VGG16_BLOCKS.flat();

/**
 * torchvision layer indices of the same convolutions inside
 * `vgg16().features`, used to translate safetensors exports.
 */
export const TORCHVISION_FEATURE_INDICES = [0, 2, 5, 7, 10, 12, 14, 17, 19, 21, 24, 26, 28];

/** Channel standardization applied by the scoring engine before block 1. */
export const NORMALIZE_MEAN = [0.485, 0.456, 0.406];
export const NORMALIZE_STD = [0.229, 0.224, 0.225];

export interface TensorShapes {
  [name: string]: number[];
}

/** All 26 expected tensors (13 kernels + 13 biases) with exact shapes. */
export function expectedShapes(): TensorShapes {
  const shapes: TensorShapes = {};
  for (const conv of ALL_CONVS) {
    shapes[`${conv.name}.weight`] = [conv.outChannels, conv.inChannels, 3, 3];
    shapes[`${conv.name}.bias`] = [conv.outChannels];
  }
  return shapes;
}
