//! Per-device random streams.
//!
//! Every `(seed, device, purpose)` triple owns an independent ChaCha8
//! stream: the seed keys the cipher, the device and purpose select the
//! stream nonce and the draw index is the block counter. Two components
//! that consume the same stream in the same order see the same variates
//! regardless of when, relative to other streams, the draws happen.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mobility::MobilityStreams;
use crate::types::DeviceId;

/// Source of uniform variates in `[0, 1)`.
pub trait Uniform {
    fn next_uniform(&mut self) -> f64;
}

/// What a stream is used for. The discriminant is part of the stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Purpose {
    MobilityDwell = 1,
    MobilityDestination = 2,
    Load = 3,
    Placement = 4,
    ProfileAssignment = 5,
}

#[derive(Debug, Clone)]
pub struct DeviceStream {
    rng: ChaCha8Rng,
}

impl DeviceStream {
    pub fn new(seed: u64, device: DeviceId, purpose: Purpose) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((device.0 as u64) << 8) | purpose as u64);
        Self { rng }
    }
}

impl Uniform for DeviceStream {
    #[inline]
    fn next_uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// The streams a device consumes during a run.
#[derive(Debug, Clone)]
pub struct DeviceStreams {
    pub mobility: MobilityStreams<DeviceStream>,
    pub load: DeviceStream,
    pub placement: DeviceStream,
}

impl DeviceStreams {
    pub fn new(seed: u64, device: DeviceId) -> Self {
        Self {
            mobility: MobilityStreams {
                dwell: DeviceStream::new(seed, device, Purpose::MobilityDwell),
                destination: DeviceStream::new(seed, device, Purpose::MobilityDestination),
            },
            load: DeviceStream::new(seed, device, Purpose::Load),
            placement: DeviceStream::new(seed, device, Purpose::Placement),
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Replays a fixed list of variates, then panics. Test helper.
#[derive(Debug, Clone)]
pub struct Scripted {
    values: Vec<f64>,
    pos: usize,
}

impl Scripted {
    pub fn new(values: impl Into<Vec<f64>>) -> Self {
        Self { values: values.into(), pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl Uniform for Scripted {
    fn next_uniform(&mut self) -> f64 {
        let v = *self.values.get(self.pos).expect("scripted uniform source exhausted");
        self.pos += 1;
        v
    }
}
