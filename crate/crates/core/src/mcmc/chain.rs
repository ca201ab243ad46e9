//! A single heat-bath chain with checkerboard sweeps.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Field, Parameters, Site};

use super::conditional::ConditionalTable;
use super::rng::{Layout, UniformStream};

/// Side length from which half-sweeps are split across threads by row.
pub const DEFAULT_PARALLEL_THRESHOLD: usize = 64;

/// Heights split by checkerboard color into two zero-padded `(N + 2)^2`
/// planes. Color 0 ("black") holds the sites with `r + c` even. A site of one
/// color only reads the other plane, so one color can be updated in place
/// while the other is shared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Planes {
    n: usize,
    planes: [Vec<u32>; 2],
}

impl Planes {
    pub(crate) fn from_field(field: &Field) -> Self {
        let n = field.side();
        let p = n + 2;
        let mut planes = [vec![0; p * p], vec![0; p * p]];
        for (i, &v) in field.heights().iter().enumerate() {
            let (r, c) = (i / n, i % n);
            planes[(r + c) % 2][(r + 1) * p + c + 1] = v;
        }
        Self { n, planes }
    }

    pub(crate) fn to_field(&self) -> Field {
        let n = self.n;
        let heights = (0..n * n).map(|i| self.get((i / n, i % n))).collect();
        Field::from_heights(n, heights).expect("side is positive")
    }

    #[inline]
    pub(crate) fn get(&self, (r, c): Site) -> u32 {
        self.planes[(r + c) % 2][(r + 1) * (self.n + 2) + c + 1]
    }

    pub(crate) fn neighbors(&self, (r, c): Site) -> [u32; 4] {
        let p = self.n + 2;
        let other = &self.planes[(r + c + 1) % 2];
        let j = (r + 1) * p + c + 1;
        [other[j - p], other[j + p], other[j - 1], other[j + 1]]
    }

    /// `(rows of the color being updated, the other plane)`, restricted to the
    /// interior rows of the updated plane.
    pub(crate) fn split(&mut self, color: usize) -> (&mut [u32], &[u32]) {
        let p = self.n + 2;
        let [black, white] = &mut self.planes;
        let (mine, other) = if color == 0 {
            (black, &*white)
        } else {
            (white, &*black)
        };
        (&mut mine[p..(self.n + 1) * p], other)
    }
}

/// Updates the sites of one color in row `r`, drawing uniforms from `stream`.
/// `row` is the padded row of the plane being updated; `other` is the whole
/// padded plane of the opposite color. Returns the number of cap hits.
#[inline]
pub(crate) fn update_row(
    n: usize,
    r: usize,
    color: usize,
    row: &mut [u32],
    other: &[u32],
    table: &ConditionalTable,
    stream: &mut UniformStream,
) -> u64 {
    let p = n + 2;
    let (up, mid, down) = (
        &other[r * p..],
        &other[(r + 1) * p..],
        &other[(r + 2) * p..],
    );
    let mut hits = 0;
    let mut c = (r + color) % 2;
    while c < n {
        let j = c + 1;
        let (k, hit) = table.sample(
            [up[j], down[j], mid[j - 1], mid[j + 1]],
            stream.next_uniform(),
        );
        row[j] = k;
        hits += hit as u64;
        c += 2;
    }
    hits
}

/// State of one heat-bath chain targeting the capped pinned measure.
#[derive(Debug, Clone)]
pub struct ChainState {
    params: Parameters,
    cap: u32,
    seed: u64,
    stream_id: u64,
    planes: Planes,
    sweep_count: u64,
    cap_hit_count: u64,
    table: Arc<ConditionalTable>,
    layout: Arc<Layout>,
    stream: UniformStream,
    parallel_threshold: usize,
}

impl ChainState {
    /// A chain started from the flat field at height zero, on stream 0.
    pub fn new(params: &Parameters, cap: u32, seed: u64) -> Result<Self> {
        Self::from_field(Field::zeros(params.n()), params, cap, seed, 0)
    }

    /// A chain started from `field`, drawing from stream `stream` of `seed`.
    pub fn from_field(
        field: Field,
        params: &Parameters,
        cap: u32,
        seed: u64,
        stream: u64,
    ) -> Result<Self> {
        if cap == 0 {
            return Err(Error::InvalidParameter(
                "height cap must be positive".into(),
            ));
        }
        Self::check_field(&field, params, cap)?;
        Ok(Self {
            params: *params,
            cap,
            seed,
            stream_id: stream,
            planes: Planes::from_field(&field),
            sweep_count: 0,
            cap_hit_count: 0,
            table: Arc::new(ConditionalTable::new(params, cap)),
            layout: Arc::new(Layout::new(params.n())),
            stream: UniformStream::new(seed, stream),
            parallel_threshold: DEFAULT_PARALLEL_THRESHOLD,
        })
    }

    fn check_field(field: &Field, params: &Parameters, cap: u32) -> Result<()> {
        if field.side() != params.n() {
            return Err(Error::SideMismatch {
                space: field.side(),
                params: params.n(),
            });
        }
        if field.max_height() > cap {
            return Err(Error::InvalidField(format!(
                "height {} exceeds the cap {cap}",
                field.max_height()
            )));
        }
        Ok(())
    }

    pub fn field(&self) -> Field {
        self.planes.to_field()
    }

    pub fn height(&self, site: Site) -> u32 {
        self.planes.get(site)
    }

    /// Neighbor heights of a site (up, down, left, right), boundary as zero.
    pub fn neighbor_heights(&self, site: Site) -> [u32; 4] {
        self.planes.neighbors(site)
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn side(&self) -> usize {
        self.params.n()
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream_id
    }

    pub fn sweep_count(&self) -> u64 {
        self.sweep_count
    }

    pub fn cap_hit_count(&self) -> u64 {
        self.cap_hit_count
    }

    /// Single-site updates performed so far.
    pub fn updates(&self) -> u64 {
        self.sweep_count * self.layout.sites()
    }

    pub fn cap_hit_fraction(&self) -> f64 {
        match self.updates() {
            0 => 0.0,
            u => self.cap_hit_count as f64 / u as f64,
        }
    }

    /// Replaces the heights without touching the sweep counter, so later
    /// sweeps keep consuming fresh uniforms.
    pub fn set_field(&mut self, field: &Field) -> Result<()> {
        Self::check_field(field, &self.params, self.cap)?;
        self.planes = Planes::from_field(field);
        Ok(())
    }

    /// Half-sweeps on lattices with side at least `threshold` run row-parallel.
    /// The trajectory does not depend on this setting.
    pub fn set_parallel_threshold(&mut self, threshold: usize) {
        self.parallel_threshold = threshold;
    }

    pub(crate) fn is_parallel(&self) -> bool {
        self.side() >= self.parallel_threshold
    }

    pub(crate) fn table_arc(&self) -> Arc<ConditionalTable> {
        Arc::clone(&self.table)
    }

    pub(crate) fn layout_arc(&self) -> Arc<Layout> {
        Arc::clone(&self.layout)
    }

    pub(crate) fn uniform_stream(&mut self) -> &mut UniformStream {
        &mut self.stream
    }

    pub(crate) fn planes_mut(&mut self) -> &mut Planes {
        &mut self.planes
    }

    pub(crate) fn record_sweep(&mut self, hits: u64) {
        self.sweep_count += 1;
        self.cap_hit_count += hits;
    }

    /// One checkerboard sweep: all black sites, then all white sites.
    pub fn sweep(&mut self) {
        let n = self.side();
        let sweep = self.sweep_count;
        let mut hits = 0;
        if self.is_parallel() {
            let p = n + 2;
            for color in 0..2 {
                let (table, layout, stream) = (&*self.table, &*self.layout, &self.stream);
                let (rows, other) = self.planes.split(color);
                hits += rows
                    .par_chunks_mut(p)
                    .enumerate()
                    .map(|(r, row)| {
                        let mut cursor = stream.fork_at(layout.row_draw(sweep, color, r));
                        update_row(n, r, color, row, other, table, &mut cursor)
                    })
                    .sum::<u64>();
            }
        } else {
            self.stream.seek(self.layout.row_draw(sweep, 0, 0));
            let p = n + 2;
            for color in 0..2 {
                let (table, stream) = (&*self.table, &mut self.stream);
                let (rows, other) = self.planes.split(color);
                for (r, row) in rows.chunks_mut(p).enumerate() {
                    hits += update_row(n, r, color, row, other, table, stream);
                }
            }
        }
        self.record_sweep(hits);
    }

    pub fn sweep_many(&mut self, count: u64) {
        for _ in 0..count {
            self.sweep();
        }
    }
}

/// Performs one checkerboard sweep and returns the updated state.
pub fn heat_bath_sweep(mut state: ChainState) -> ChainState {
    state.sweep();
    state
}

/// Starting configuration of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    /// `phi = 0` everywhere.
    #[default]
    Zero,
    /// `phi = k` everywhere.
    Flat(u32),
}

impl InitialCondition {
    pub fn field(&self, n: usize) -> Field {
        match *self {
            InitialCondition::Zero => Field::zeros(n),
            InitialCondition::Flat(k) => Field::constant(n, k),
        }
    }
}

/// `ceil(ln N / (2 beta)) + 8`.
pub fn default_cap(beta: f64, n: usize) -> u32 {
    ((n as f64).ln() / (2.0 * beta)).ceil().max(0.0) as u32 + 8
}

/// Schedule and stream of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub sweeps: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub seed: u64,
    pub stream: u64,
    /// Height cap; `None` selects [`default_cap`].
    pub cap: Option<u32>,
    pub initial: InitialCondition,
    /// Cap-hit fraction above which the run metadata carries a warning.
    pub cap_hit_threshold: f64,
}

impl RunSpec {
    pub const DEFAULT_CAP_HIT_THRESHOLD: f64 = 1e-6;

    pub fn new(sweeps: u64, burn_in: u64, thinning: u64, seed: u64) -> Self {
        Self {
            sweeps,
            burn_in,
            thinning,
            seed,
            stream: 0,
            cap: None,
            initial: InitialCondition::Zero,
            cap_hit_threshold: Self::DEFAULT_CAP_HIT_THRESHOLD,
        }
    }

    pub fn resolved_cap(&self, params: &Parameters) -> u32 {
        self.cap
            .unwrap_or_else(|| default_cap(params.beta(), params.n()))
    }

    /// Number of snapshots the run hands to its hook.
    pub fn kept_samples(&self) -> u64 {
        (self.sweeps - self.burn_in) / self.thinning
    }

    fn validate(&self) -> Result<()> {
        if self.thinning == 0 {
            return Err(Error::InvalidRun("thinning must be at least 1".into()));
        }
        if self.sweeps < self.burn_in {
            return Err(Error::InvalidRun(format!(
                "{} sweeps do not cover a burn-in of {}",
                self.sweeps, self.burn_in
            )));
        }
        if self.cap == Some(0) {
            return Err(Error::InvalidRun("height cap must be positive".into()));
        }
        Ok(())
    }
}

/// What a finished run reports alongside its samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub spec: RunSpec,
    pub cap: u32,
    pub kept_samples: u64,
    pub updates: u64,
    pub cap_hit_count: u64,
    pub cap_hit_fraction: f64,
    pub warnings: Vec<String>,
}

impl RunMetadata {
    fn from_state(spec: &RunSpec, state: &ChainState, kept: u64) -> Self {
        let fraction = state.cap_hit_fraction();
        let mut warnings = Vec::new();
        if fraction > spec.cap_hit_threshold {
            warnings.push(format!(
                "cap hit fraction {fraction:.3e} exceeds {:.1e}; the cap {} is too low for beta = {}, N = {}",
                spec.cap_hit_threshold,
                state.cap(),
                state.params().beta(),
                state.side()
            ));
        }
        Self {
            spec: *spec,
            cap: state.cap(),
            kept_samples: kept,
            updates: state.updates(),
            cap_hit_count: state.cap_hit_count(),
            cap_hit_fraction: fraction,
            warnings,
        }
    }
}

/// Runs a chain and calls `hook(sweep_index, state)` after every kept sweep:
/// sweep indices `s` (counted from 1) with `s > burn_in` and
/// `(s - burn_in) % thinning == 0`.
pub fn run_chain<F>(params: &Parameters, spec: &RunSpec, mut hook: F) -> Result<RunMetadata>
where
    F: FnMut(u64, &ChainState),
{
    spec.validate()?;
    let cap = spec.resolved_cap(params);
    if let InitialCondition::Flat(k) = spec.initial {
        if k > cap {
            return Err(Error::InvalidRun(format!(
                "initial height {k} exceeds the cap {cap}"
            )));
        }
    }
    let mut state = ChainState::from_field(
        spec.initial.field(params.n()),
        params,
        cap,
        spec.seed,
        spec.stream,
    )?;
    let mut kept = 0;
    for s in 1..=spec.sweeps {
        state.sweep();
        if s > spec.burn_in && (s - spec.burn_in) % spec.thinning == 0 {
            hook(s, &state);
            kept += 1;
        }
    }
    Ok(RunMetadata::from_state(spec, &state, kept))
}

/// Runs a chain and collects `observe(field)` for every kept sweep.
pub fn collect_chain<T, G>(
    params: &Parameters,
    spec: &RunSpec,
    mut observe: G,
) -> Result<(Vec<(u64, T)>, RunMetadata)>
where
    G: FnMut(&Field) -> T,
{
    let mut out = Vec::with_capacity(spec.kept_samples() as usize);
    let meta = run_chain(params, spec, |s, state| {
        out.push((s, observe(&state.field())))
    })?;
    Ok((out, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, h: f64) -> Parameters {
        Parameters::new(1.0, h, n).unwrap()
    }

    #[test]
    fn planes_round_trip() {
        let f = Field::from_rows(&[[1, 2, 3], [4, 5, 6], [7, 8, 9]]).unwrap();
        let planes = Planes::from_field(&f);
        assert_eq!(planes.to_field(), f);
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(planes.neighbors((r, c)), f.neighbor_heights((r, c)));
            }
        }
    }

    #[test]
    fn default_cap_values() {
        assert_eq!(default_cap(1.0, 1), 8);
        assert_eq!(default_cap(1.0, 128), 11);
        assert_eq!(default_cap(0.5, 128), 13);
    }

    #[test]
    fn rejects_bad_fields() {
        let p = params(3, 0.0);
        assert!(ChainState::new(&p, 0, 1).is_err());
        assert!(ChainState::from_field(Field::constant(3, 5), &p, 4, 1, 0).is_err());
        assert!(matches!(
            ChainState::from_field(Field::zeros(2), &p, 4, 1, 0),
            Err(Error::SideMismatch { .. })
        ));
    }

    #[test]
    fn heights_stay_within_cap() {
        let p = Parameters::new(0.3, 0.0, 8).unwrap();
        let mut s = ChainState::new(&p, 2, 5).unwrap();
        s.sweep_many(200);
        assert!(s.field().max_height() <= 2);
        // at beta = 0.3 a cap of 2 is hit often
        assert!(s.cap_hit_count() > 0);
        assert_eq!(s.updates(), 200 * 64);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let p = params(6, 0.01);
        let mut a = ChainState::new(&p, 6, 42).unwrap();
        let mut b = ChainState::new(&p, 6, 42).unwrap();
        a.sweep_many(100);
        b.sweep_many(100);
        assert_eq!(a.field(), b.field());
        let mut c = ChainState::new(&p, 6, 43).unwrap();
        c.sweep_many(100);
        assert_ne!(a.field(), c.field());
    }

    #[test]
    fn parallel_path_matches_sequential() {
        let p = Parameters::new(0.7, 0.0, 11).unwrap();
        let mut seq = ChainState::from_field(Field::constant(11, 2), &p, 9, 9, 4).unwrap();
        let mut par = seq.clone();
        seq.set_parallel_threshold(usize::MAX);
        par.set_parallel_threshold(1);
        for _ in 0..50 {
            seq.sweep();
            par.sweep();
            assert_eq!(seq.field(), par.field());
        }
        assert_eq!(seq.cap_hit_count(), par.cap_hit_count());
    }

    #[test]
    fn run_chain_schedule() {
        let p = params(3, 0.0);
        let spec = RunSpec::new(25, 5, 4, 1);
        let mut seen = Vec::new();
        let meta = run_chain(&p, &spec, |s, _| seen.push(s)).unwrap();
        assert_eq!(seen, vec![9, 13, 17, 21, 25]);
        assert_eq!(meta.kept_samples, 5);
        assert_eq!(spec.kept_samples(), 5);
        assert_eq!(meta.cap, default_cap(1.0, 3));
    }

    #[test]
    fn empty_stream_after_burn_in() {
        let p = params(3, 0.0);
        let meta = run_chain(&p, &RunSpec::new(10, 10, 1, 1), |_, _| {
            panic!("no samples expected")
        })
        .unwrap();
        assert_eq!(meta.kept_samples, 0);
        assert_eq!(meta.updates, 90);
        assert!(meta.warnings.is_empty());
        assert!(run_chain(&p, &RunSpec::new(5, 10, 1, 1), |_, _| {}).is_err());
        assert!(run_chain(&p, &RunSpec::new(5, 0, 0, 1), |_, _| {}).is_err());
    }

    #[test]
    fn low_cap_triggers_warning() {
        let p = Parameters::new(0.2, 0.0, 6).unwrap();
        let mut spec = RunSpec::new(50, 0, 1, 3);
        spec.cap = Some(1);
        let meta = run_chain(&p, &spec, |_, _| {}).unwrap();
        assert!(meta.cap_hit_fraction > 1e-6);
        assert_eq!(meta.warnings.len(), 1);
    }

    #[test]
    fn observable_stream_reproducible() {
        let p = params(5, 0.0);
        let spec = RunSpec::new(60, 10, 5, 77);
        let (a, _) = collect_chain(&p, &spec, |f| f.heights().to_vec()).unwrap();
        let (b, _) = collect_chain(&p, &spec, |f| f.heights().to_vec()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
    }

    #[test]
    fn flat_start_is_reported_and_checked() {
        let p = params(4, 0.0);
        let mut spec = RunSpec::new(1, 0, 1, 0);
        spec.initial = InitialCondition::Flat(3);
        spec.cap = Some(2);
        assert!(run_chain(&p, &spec, |_, _| {}).is_err());
    }
}
