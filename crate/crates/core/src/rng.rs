//! Seeded, streamable and serializable random numbers.
//!
//! The generator is xoshiro256++ (period 2^256 - 1). A seed is expanded into
//! the 256-bit state with SplitMix64, and stream `k` starts `k` jumps of 2^128
//! draws further along the same cycle, so streams opened from one seed can
//! never overlap within any realistic study.
//!
//! The full generator position (state words, stream id and draw counter) can be
//! written out as a fixed-width hex string and restored later, which is how a
//! study records the start state of every repetition.

use serde::{Deserialize, Serialize};

use crate::dist;
use crate::error::{Error, Result};

/// Name and version written into run manifests.
pub const GENERATOR_FAMILY: &str = "xoshiro256++/splitmix64-seed/jump-2^128-streams";

/// Leading byte of every serialized state. Bump when the layout changes.
pub const STATE_FORMAT_TAG: u8 = 0x01;

const STATE_BYTES: usize = 1 + 4 * 8 + 8 + 8;

/// Length of [`Generator::state_hex`] output.
pub const STATE_HEX_LEN: usize = STATE_BYTES * 2;

const JUMP: [u64; 4] = [
    0x180e_c6d3_3cfd_0aba,
    0xd5a6_1266_f0c9_392c,
    0xa958_2618_e03f_c9aa,
    0x39ab_dc45_29b1_661c,
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    s: [u64; 4],
    stream_id: u64,
    draws_made: u64,
}

fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Generator {
    /// Opens `stream_id` of the cycle selected by `seed`.
    ///
    /// Opening stream `k` costs `k` jumps; callers that need many consecutive
    /// streams should open the first and call [`Generator::next_stream`].
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut sm = seed;
        let mut s = [0u64; 4];
        for w in s.iter_mut() {
            *w = splitmix64(&mut sm);
        }
        if s == [0; 4] {
            s[0] = 1;
        }
        let mut g = Generator {
            s,
            stream_id: 0,
            draws_made: 0,
        };
        for _ in 0..stream_id {
            g.jump();
        }
        g.stream_id = stream_id;
        g
    }

    /// A fresh generator at the start of the following stream.
    ///
    /// Only meaningful on a generator that has not produced any draws yet.
    pub fn next_stream(&self) -> Self {
        assert_eq!(self.draws_made, 0, "next_stream needs an unused generator");
        let mut g = self.clone();
        g.jump();
        g.stream_id += 1;
        g
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn draws_made(&self) -> u64 {
        self.draws_made
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.draws_made += 1;
        self.step()
    }

    #[inline]
    fn step(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Advances the state by 2^128 draws without touching the draw counter.
    fn jump(&mut self) {
        let mut acc = [0u64; 4];
        for word in JUMP {
            for b in 0..64 {
                if word & (1u64 << b) != 0 {
                    for (a, s) in acc.iter_mut().zip(self.s.iter()) {
                        *a ^= *s;
                    }
                }
                self.step();
            }
        }
        self.s = acc;
    }

    /// Uniform on the open interval (0, 1): the midpoint of one of 2^52 cells.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
    }

    /// 1 iff one uniform draw falls below `p`.
    pub fn bernoulli(&mut self, p: f64) -> Result<u8> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "bernoulli probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(u8::from(self.uniform() < p))
    }

    /// Normal deviate by inverting the standard normal CDF at one uniform draw.
    pub fn normal(&mut self, mu: f64, sigma: f64) -> Result<f64> {
        if !(sigma > 0.0 && sigma.is_finite()) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "normal requires finite mu and sigma > 0, got mu={mu}, sigma={sigma}"
            )));
        }
        Ok(mu + sigma * dist::normal_quantile(self.uniform()))
    }

    /// Index in `0..n` from a single uniform draw.
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    pub fn state_hex(&self) -> String {
        let mut bytes = Vec::with_capacity(STATE_BYTES);
        bytes.push(STATE_FORMAT_TAG);
        for w in self.s {
            bytes.extend_from_slice(&w.to_be_bytes());
        }
        bytes.extend_from_slice(&self.stream_id.to_be_bytes());
        bytes.extend_from_slice(&self.draws_made.to_be_bytes());
        hex::encode(bytes)
    }

    pub fn from_state_hex(text: &str) -> Result<Self> {
        if text.len() != STATE_HEX_LEN {
            return Err(Error::InvalidState(format!(
                "expected {STATE_HEX_LEN} hex characters, got {}",
                text.len()
            )));
        }
        if text.bytes().any(|b| b.is_ascii_uppercase()) {
            return Err(Error::InvalidState("state hex must be lowercase".into()));
        }
        let bytes = hex::decode(text).map_err(|e| Error::InvalidState(e.to_string()))?;
        if bytes[0] != STATE_FORMAT_TAG {
            return Err(Error::InvalidState(format!(
                "unknown state format tag {:#04x}",
                bytes[0]
            )));
        }
        let word = |i: usize| {
            let start = 1 + 8 * i;
            u64::from_be_bytes(bytes[start..start + 8].try_into().unwrap())
        };
        let s = [word(0), word(1), word(2), word(3)];
        if s == [0; 4] {
            return Err(Error::InvalidState("all-zero state".into()));
        }
        Ok(Generator {
            s,
            stream_id: word(4),
            draws_made: word(5),
        })
    }
}

/// Generator state at the start of one repetition (or, for repetition
/// `n_sim + 1`, after the last one).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatesRecord {
    pub dgm_id: String,
    pub repetition: u64,
    pub state_hex: String,
}

impl StatesRecord {
    pub fn capture(dgm_id: &str, repetition: u64, g: &Generator) -> Self {
        StatesRecord {
            dgm_id: dgm_id.to_string(),
            repetition,
            state_hex: g.state_hex(),
        }
    }

    pub fn restore(&self) -> Result<Generator> {
        Generator::from_state_hex(&self.state_hex)
    }
}
