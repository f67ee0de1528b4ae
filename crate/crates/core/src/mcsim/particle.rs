use crate::Vec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossCause {
    Background,
    OverBarrier,
    Majorana,
    OutOfDomain,
}

impl LossCause {
    pub const ALL: [LossCause; 4] = [
        LossCause::Background,
        LossCause::OverBarrier,
        LossCause::Majorana,
        LossCause::OutOfDomain,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LossCause::Background => "background",
            LossCause::OverBarrier => "over-barrier",
            LossCause::Majorana => "majorana",
            LossCause::OutOfDomain => "out-of-domain",
        }
    }
}

impl fmt::Display for LossCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Alive,
    Lost(LossCause),
}

impl Status {
    pub fn is_alive(&self) -> bool {
        matches!(self, Status::Alive)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Alive => "alive",
            Status::Lost(c) => c.as_str(),
        }
    }
}

/// Classical point particle. `id` doubles as the index of its random
/// stream, so a particle's history does not depend on how the ensemble is
/// split across workers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub id: u64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub status: Status,
}

impl Particle {
    pub fn new(id: u64, position: Vec3, velocity: Vec3) -> Self {
        Particle {
            id,
            position,
            velocity,
            status: Status::Alive,
        }
    }

    pub fn is_alive(&self) -> bool {
        self.status.is_alive()
    }

    /// Marks the particle lost. Returns false if it was already lost, in
    /// which case the recorded cause is kept.
    pub fn mark_lost(&mut self, cause: LossCause) -> bool {
        if self.is_alive() {
            self.status = Status::Lost(cause);
            true
        } else {
            false
        }
    }
}

/// Purposes that own disjoint random streams of a particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StreamPurpose {
    Sampling = 0,
    Losses = 1,
}

/// Counter-based generator for particle `id`: the run seed selects the key
/// and the particle id and purpose select the stream.
pub(crate) fn particle_rng(seed: u64, id: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((id << 2) | purpose as u64);
    rng
}

/// A loss event: particle `id` was removed at time `t` (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossEvent {
    pub id: u64,
    pub t: f64,
    pub cause: LossCause,
}

/// State of the whole ensemble at one requested time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub particles: Vec<Particle>,
}

impl Snapshot {
    pub fn alive(&self) -> usize {
        self.particles.iter().filter(|p| p.is_alive()).count()
    }

    pub fn lost(&self, cause: LossCause) -> usize {
        self.particles
            .iter()
            .filter(|p| p.status == Status::Lost(cause))
            .count()
    }

    pub fn alive_particles(&self) -> impl Iterator<Item = &Particle> {
        self.particles.iter().filter(|p| p.is_alive())
    }
}
