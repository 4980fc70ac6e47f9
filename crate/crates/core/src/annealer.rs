//! Single-flip simulated annealing over a [`QuboProblem`].
//!
//! Iteration `t` runs at temperature `t0 * gamma^t` and performs
//! `2 * n` Metropolis updates on uniformly chosen bits. The lowest-energy
//! state seen anywhere in the run is returned.

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qubo::QuboProblem;
use crate::sampler::accept;

/// Iterations between exact recomputations of the running energy.
const RESYNC_EVERY: usize = 10_000;

/// Geometric cooling schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub iterations: usize,
    pub t0: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl AnnealSchedule {
    /// `10^6` iterations from `T0 = 500` with decay `0.99996`.
    pub fn reference(seed: u64) -> Self {
        Self {
            iterations: 1_000_000,
            t0: 500.0,
            gamma: 0.99996,
            seed,
        }
    }

    /// Same start and end temperature spread over a different iteration
    /// count: `gamma' = gamma^(iterations / new_iterations)`.
    pub fn rescaled(&self, iterations: usize) -> Self {
        let ratio = self.iterations as f64 / iterations as f64;
        Self {
            iterations,
            gamma: self.gamma.powf(ratio),
            ..*self
        }
    }

    /// Decay rate that takes `t0` to `t_final` over `iterations` steps.
    pub fn with_final_temperature(iterations: usize, t0: f64, t_final: f64, seed: u64) -> Self {
        Self {
            iterations,
            t0,
            gamma: (t_final / t0).powf(1.0 / iterations as f64),
            seed,
        }
    }

    pub fn final_temperature(&self) -> f64 {
        self.t0 * self.gamma.powf(self.iterations as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::InvalidConfig("iterations must be >= 1".into()));
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidConfig(
                "initial temperature must be > 0".into(),
            ));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig("decay rate must be in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealResult {
    pub best_z: Vec<bool>,
    pub best_energy: f64,
    /// Energy of the chain state when the run ended.
    pub final_energy: f64,
    pub wall_time: f64,
    pub flips_attempted: u64,
    pub flips_accepted: u64,
}

/// One row of a decimated run trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub temperature: f64,
    pub energy: f64,
    pub best_energy: f64,
}

pub fn anneal(q: &QuboProblem, sched: &AnnealSchedule) -> Result<AnnealResult> {
    run(q, sched, None)
}

/// Like [`anneal`], also recording at most `max_rows` evenly spaced
/// iterations (the last iteration is always included).
pub fn anneal_traced(
    q: &QuboProblem,
    sched: &AnnealSchedule,
    max_rows: usize,
) -> Result<(AnnealResult, Vec<TraceRow>)> {
    let mut trace = Vec::new();
    let result = run(q, sched, Some((max_rows.max(1), &mut trace)))?;
    Ok((result, trace))
}

/// Writes a trace as CSV with header
/// `iteration,temperature,energy,best_energy`.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["iteration", "temperature", "energy", "best_energy"])?;
    for r in rows {
        writer.write_record([
            r.iteration.to_string(),
            r.temperature.to_string(),
            r.energy.to_string(),
            r.best_energy.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Mutable chain state with local fields `f_i = sum_{j != i} Q_ij z_j`, so
/// the energy change of flipping `i` is `s * (Q_ii + 2 f_i)` with
/// `s = +1` for `0 -> 1` and `-1` for `1 -> 0`.
struct Chain<'a> {
    q: &'a QuboProblem,
    z: Vec<bool>,
    fields: Vec<f64>,
    energy: f64,
}

impl<'a> Chain<'a> {
    fn new(q: &'a QuboProblem, z: Vec<bool>) -> Self {
        let mut chain = Self {
            q,
            fields: vec![0.0; z.len()],
            z,
            energy: 0.0,
        };
        chain.resync();
        chain
    }

    fn resync(&mut self) {
        let n = self.q.n();
        for i in 0..n {
            let row = self.q.row(i);
            self.fields[i] = (0..n)
                .filter(|&j| j != i && self.z[j])
                .map(|j| row[j])
                .sum();
        }
        self.energy = self.q.energy_unchecked(&self.z);
    }

    #[inline]
    fn delta(&self, i: usize) -> f64 {
        let s = if self.z[i] { -1.0 } else { 1.0 };
        s * (self.q.get(i, i) + 2.0 * self.fields[i])
    }

    #[inline]
    fn flip(&mut self, i: usize, delta: f64) {
        let s = if self.z[i] { -1.0 } else { 1.0 };
        self.z[i] = !self.z[i];
        let row = self.q.row(i);
        for (f, &qij) in self.fields.iter_mut().zip(row) {
            *f += s * qij;
        }
        self.fields[i] -= s * row[i];
        self.energy += delta;
    }
}

fn run(
    q: &QuboProblem,
    sched: &AnnealSchedule,
    mut trace: Option<(usize, &mut Vec<TraceRow>)>,
) -> Result<AnnealResult> {
    sched.validate()?;
    let n = q.n();
    if n == 0 {
        return Err(Error::InvalidProblem(
            "cannot anneal an empty problem".into(),
        ));
    }

    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(sched.seed);
    let initial: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
    let mut chain = Chain::new(q, initial);

    let mut best_z = chain.z.clone();
    let mut best_energy = chain.energy;
    let mut attempted = 0u64;
    let mut accepted = 0u64;
    let stride = trace
        .as_ref()
        .map_or(usize::MAX, |(rows, _)| sched.iterations.div_ceil(*rows));

    let mut temperature = sched.t0;
    for t in 0..sched.iterations {
        for _ in 0..2 * n {
            let i = rng.random_range(0..n);
            let delta = chain.delta(i);
            attempted += 1;
            if accept(delta, temperature, &mut rng) {
                chain.flip(i, delta);
                accepted += 1;
                if chain.energy < best_energy {
                    best_energy = chain.energy;
                    best_z.copy_from_slice(&chain.z);
                }
            }
        }
        if (t + 1) % RESYNC_EVERY == 0 {
            chain.resync();
            if chain.energy < best_energy {
                best_energy = chain.energy;
                best_z.copy_from_slice(&chain.z);
            }
        }
        if let Some((_, rows)) = trace.as_mut() {
            if t % stride == 0 || t + 1 == sched.iterations {
                rows.push(TraceRow {
                    iteration: t,
                    temperature,
                    energy: chain.energy,
                    best_energy,
                });
            }
        }
        temperature *= sched.gamma;
    }

    chain.resync();
    let mut best_energy = q.energy_unchecked(&best_z);
    if chain.energy < best_energy {
        best_energy = chain.energy;
        best_z.copy_from_slice(&chain.z);
    }
    Ok(AnnealResult {
        best_z,
        best_energy,
        final_energy: chain.energy,
        wall_time: start.elapsed().as_secs_f64(),
        flips_attempted: attempted,
        flips_accepted: accepted,
    })
}
