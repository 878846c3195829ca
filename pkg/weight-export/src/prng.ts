/**
 * Deterministic generators shared with the scoring engine's fixtures.
 *
 * xorshift32 (shifts 13, 17, 5) over uint32 state; uniforms are the state
 * divided by 2^32. The stream must match bit-for-bit across languages, so
 * only integer operations touch the state.
 */

export class XorShift32 {
  private state: number;

  constructor(seed: number) {
    if (!Number.isInteger(seed) || seed <= 0 || seed >= 2 ** 32) {
      throw new Error(`xorshift32 seed must be a nonzero u32, got ${seed}`);
    }
    this.state = seed >>> 0;
  }

  nextUint32(): number {
    let x = this.state;
    x = (x ^ (x << 13)) >>> 0;
    x = (x ^ (x >>> 17)) >>> 0;
    x = (x ^ (x << 5)) >>> 0;
    this.state = x;
    return x;
  }

  /** Uniform in [0, 1). */
  nextUniform(): number {
    return this.nextUint32() / 4294967296;
  }

  /** Standard normal via Box-Muller on two uniforms. */
  nextNormal(): number {
    let u = this.nextUniform();
    while (u === 0) {
      u = this.nextUniform();
    }
    const v = this.nextUniform();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }
}

/** Row-major H x W x 3 image with uniform values in [0, 1). */
export function fixtureInput(seed: number, height: number, width: number): Float64Array {
  const rng = new XorShift32(seed);
  const out = new Float64Array(height * width * 3);
  for (let i = 0; i < out.length; i++) {
    out[i] = rng.nextUniform();
  }
  return out;
}
