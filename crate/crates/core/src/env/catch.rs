use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Environment, Observation, Transition};
use crate::error::EnvError;
use crate::value::Matrix;

/// Side length of the square Catch grid.
pub const CATCH_SIZE: usize = 12;
/// Balls dropped per episode.
pub const CATCH_BALLS: u32 = 10;
const PADDLE_START: usize = 5;
const BOTTOM: usize = CATCH_SIZE - 1;

/// A ball falls one row per frame from the top of a 12×12 grid; a 3-wide
/// paddle on the bottom row moves left or right to catch it. Actions are
/// `0` no-op, `1` left, `2` right. Each ball scores +1 if caught and −1 if
/// missed; an episode drops ten balls.
///
/// Observations draw the ball in the red plane and the paddle in the green
/// plane; blue stays empty.
#[derive(Clone, Debug)]
pub struct Catch {
    rng: ChaCha8Rng,
    ball_row: usize,
    ball_col: usize,
    paddle: usize,
    balls_remaining: u32,
    score: f64,
    done: bool,
    started: bool,
}

impl Default for Catch {
    fn default() -> Self {
        Self::new()
    }
}

impl Catch {
    pub fn new() -> Self {
        Catch {
            rng: ChaCha8Rng::seed_from_u64(0),
            ball_row: 0,
            ball_col: 0,
            paddle: PADDLE_START,
            balls_remaining: CATCH_BALLS,
            score: 0.0,
            done: false,
            started: false,
        }
    }

    /// Starts an episode with a specific paddle position and first ball
    /// column. Later balls are drawn from the seeded generator.
    pub fn reset_with(&mut self, seed: u64, paddle: usize, ball_col: usize) -> Observation {
        assert!((1..=BOTTOM - 1).contains(&paddle) && ball_col < CATCH_SIZE);
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.paddle = paddle;
        self.ball_row = 0;
        self.ball_col = ball_col;
        self.balls_remaining = CATCH_BALLS;
        self.score = 0.0;
        self.done = false;
        self.started = true;
        self.render()
    }

    pub fn paddle(&self) -> usize {
        self.paddle
    }

    pub fn ball(&self) -> (usize, usize) {
        (self.ball_row, self.ball_col)
    }

    pub fn balls_remaining(&self) -> u32 {
        self.balls_remaining
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    fn render(&self) -> Observation {
        let cells = CATCH_SIZE * CATCH_SIZE;
        let mut red = vec![0.0; cells];
        red[self.ball_row * CATCH_SIZE + self.ball_col] = 1.0;
        let mut green = vec![0.0; cells];
        for c in self.paddle - 1..=self.paddle + 1 {
            green[BOTTOM * CATCH_SIZE + c] = 1.0;
        }
        Observation::new(
            Matrix::new(CATCH_SIZE, CATCH_SIZE, red),
            Matrix::new(CATCH_SIZE, CATCH_SIZE, green),
            Matrix::filled(CATCH_SIZE, CATCH_SIZE, 0.0),
        )
    }
}

impl Environment for Catch {
    fn n_actions(&self) -> usize {
        3
    }

    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let col = rng.gen_range(0..CATCH_SIZE);
        self.reset_with(seed, PADDLE_START, col);
        self.rng = rng;
        Ok(self.render())
    }

    fn step(&mut self, action: usize) -> Result<Transition, EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.done {
            return Err(EnvError::StepAfterDone);
        }
        match action {
            0 => {}
            1 => self.paddle = (self.paddle - 1).max(1),
            2 => self.paddle = (self.paddle + 1).min(BOTTOM - 1),
            _ => {
                return Err(EnvError::InvalidAction {
                    action,
                    n_actions: 3,
                })
            }
        }
        self.ball_row += 1;
        let mut reward = 0.0;
        if self.ball_row == BOTTOM {
            reward = if self.ball_col.abs_diff(self.paddle) <= 1 {
                1.0
            } else {
                -1.0
            };
            self.score += reward;
            self.balls_remaining -= 1;
            if self.balls_remaining == 0 {
                self.done = true;
            } else {
                self.ball_row = 0;
                self.ball_col = self.rng.gen_range(0..CATCH_SIZE);
            }
        }
        Ok(Transition {
            observation: self.render(),
            reward,
            done: self.done,
        })
    }
}
