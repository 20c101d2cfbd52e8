//! FMCW chirp generation, echo synthesis, noise and the IF data cube.

mod config;
mod cube;
mod echo;
mod noise;
mod synth;

pub use config::{array_axis, ArrayConfig, ChirpConfig, FrameConfig, LinkBudget, RadarConfig, RcsSettings};
pub use cube::{DataCube, CUBE_HEADER_LEN, CUBE_MAGIC};
pub use echo::{
    accumulate_echo, dechirped_echo, echo_delay, frequency_domain_echo, real_chirp, received_power,
    transmit_chirp, EchoGeometry,
};
pub use noise::{add_noise, cell_rng};
pub use synth::{FrameSynthesizer, SynthesizedFrame, TargetLibrary, TargetTruth};
