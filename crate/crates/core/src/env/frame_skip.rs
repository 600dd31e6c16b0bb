use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Environment, Observation, Transition};
use crate::error::Result;

/// Stochastic frame skipping: each frame is skipped with probability
/// `p_fskip`, in which case the previous action is replayed without
/// consulting the controller. The action history starts at action 0.
#[derive(Clone, Debug)]
pub struct FrameSkip {
    p_fskip: f64,
    rng: ChaCha8Rng,
    previous: usize,
    counted: u64,
    skipped: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameOutcome {
    pub transition: Transition,
    pub action: usize,
    /// True when the previous action was replayed; such frames do not count
    /// toward the frame cap.
    pub skipped: bool,
}

impl FrameSkip {
    pub fn new(p_fskip: f64, seed: u64) -> Self {
        assert!(
            (0.0..1.0).contains(&p_fskip),
            "p_fskip must lie in [0, 1), got {p_fskip}"
        );
        FrameSkip {
            p_fskip,
            rng: ChaCha8Rng::seed_from_u64(seed),
            previous: 0,
            counted: 0,
            skipped: 0,
        }
    }

    /// Frames where the controller chose the action.
    pub fn counted_frames(&self) -> u64 {
        self.counted
    }

    pub fn skipped_frames(&self) -> u64 {
        self.skipped
    }

    pub fn total_frames(&self) -> u64 {
        self.counted + self.skipped
    }

    /// Advances the environment one frame. `policy` is only called when the
    /// frame is not skipped.
    pub fn step<E, F>(
        &mut self,
        env: &mut E,
        observation: &Observation,
        policy: F,
    ) -> Result<FrameOutcome>
    where
        E: Environment + ?Sized,
        F: FnOnce(&Observation) -> Result<usize>,
    {
        let skipped = self.rng.gen::<f64>() < self.p_fskip;
        let action = if skipped {
            self.skipped += 1;
            self.previous
        } else {
            self.counted += 1;
            policy(observation)?
        };
        self.previous = action;
        let transition = env.step(action)?;
        Ok(FrameOutcome {
            transition,
            action,
            skipped,
        })
    }
}
