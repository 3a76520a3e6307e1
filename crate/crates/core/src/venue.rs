//! Simulated venues: mean-SNR fields over a grid of 10 m rectangles, UE
//! mobility and activity schedules, and per-interval SNR draws.
//!
//! Three environments are supported. *Homogeneous* venues draw every
//! rectangle mean from U[5, 25] dB. *Stadium* venues put U[15, 25] dB cells in
//! a centered square and U[5, 10] dB cells around it, and walk UEs from the
//! venue edge to the center and back. *Failure* venues start from U[15, 25] dB
//! everywhere and drop a contiguous block of cells to U[5, 10] dB for a window
//! of intervals.
//!
//! Randomness comes from one ChaCha8 stream per concern (grid, failure
//! region, waypoints, activity, SNR draws), all keyed by the scenario seed, so
//! a change in one concern never perturbs the draws of another. SNR draws are
//! taken in UE id order, one standard normal per active UE per interval.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snr::{quantize, SnrBin};

/// Independent random streams derived from one scenario seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RngStream {
    Grid,
    FailureRegion,
    Waypoints,
    Activity,
    SnrDraws,
    /// Reporting decisions of the scheme with the given index.
    Scheme(u32),
}

impl RngStream {
    fn id(self) -> u64 {
        match self {
            RngStream::Grid => 1,
            RngStream::FailureRegion => 2,
            RngStream::Waypoints => 3,
            RngStream::Activity => 4,
            RngStream::SnrDraws => 5,
            RngStream::Scheme(k) => 16 + u64::from(k),
        }
    }

    pub fn rng(self, seed: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(self.id());
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn lerp(self, to: Position, frac: f64) -> Position {
        Position::new(self.x + (to.x - self.x) * frac, self.y + (to.y - self.y) * frac)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VenueGeometry {
    pub width_m: f64,
    pub height_m: f64,
    pub cell_m: f64,
}

impl Default for VenueGeometry {
    fn default() -> Self {
        Self {
            width_m: 1000.0,
            height_m: 1000.0,
            cell_m: 10.0,
        }
    }
}

impl VenueGeometry {
    fn validate(&self) -> Result<()> {
        let tiles = |side: f64| {
            let n = side / self.cell_m;
            n >= 1.0 && (n - n.round()).abs() < 1e-9
        };
        if !(self.cell_m > 0.0 && tiles(self.width_m) && tiles(self.height_m)) {
            return Err(Error::InvalidScenario(format!(
                "{} x {} m venue is not tiled by {} m cells",
                self.width_m, self.height_m, self.cell_m
            )));
        }
        Ok(())
    }

    pub fn cols(&self) -> usize {
        (self.width_m / self.cell_m).round() as usize
    }

    pub fn rows(&self) -> usize {
        (self.height_m / self.cell_m).round() as usize
    }
}

/// Mean SNR per rectangle, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VenueGrid {
    geometry: VenueGeometry,
    means: Vec<f64>,
}

impl VenueGrid {
    pub fn from_means(geometry: VenueGeometry, means: Vec<f64>) -> Result<Self> {
        geometry.validate()?;
        if means.len() != geometry.cols() * geometry.rows() {
            return Err(Error::InvalidScenario(format!(
                "{} means for a {}x{} grid",
                means.len(),
                geometry.cols(),
                geometry.rows()
            )));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidScenario("non-finite cell mean".into()));
        }
        Ok(Self { geometry, means })
    }

    fn generate(
        geometry: VenueGeometry,
        rng: &mut impl Rng,
        mut range_for: impl FnMut(usize, usize) -> (f64, f64),
    ) -> Result<Self> {
        geometry.validate()?;
        let (cols, rows) = (geometry.cols(), geometry.rows());
        let mut means = Vec::with_capacity(cols * rows);
        for row in 0..rows {
            for col in 0..cols {
                let (lo, hi) = range_for(col, row);
                means.push(rng.random_range(lo..=hi));
            }
        }
        Ok(Self { geometry, means })
    }

    pub fn geometry(&self) -> VenueGeometry {
        self.geometry
    }

    pub fn cols(&self) -> usize {
        self.geometry.cols()
    }

    pub fn rows(&self) -> usize {
        self.geometry.rows()
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn mean(&self, cell: usize) -> f64 {
        self.means[cell]
    }

    /// Rectangle containing `pos`; the far venue edges belong to the last
    /// row and column.
    pub fn cell_index(&self, pos: Position) -> usize {
        let col = ((pos.x / self.geometry.cell_m).floor().max(0.0) as usize).min(self.cols() - 1);
        let row = ((pos.y / self.geometry.cell_m).floor().max(0.0) as usize).min(self.rows() - 1);
        row * self.cols() + col
    }

    pub fn cell_coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.cols(), cell / self.cols())
    }

    pub fn cell_center(&self, cell: usize) -> Position {
        let (col, row) = self.cell_coords(cell);
        let c = self.geometry.cell_m;
        Position::new((col as f64 + 0.5) * c, (row as f64 + 0.5) * c)
    }

    pub fn contains(&self, pos: Position) -> bool {
        (0.0..=self.geometry.width_m).contains(&pos.x)
            && (0.0..=self.geometry.height_m).contains(&pos.y)
    }
}

/// Every rectangle mean drawn from U[5, 25] dB.
pub fn gen_homogeneous(geometry: VenueGeometry, seed: u64) -> Result<VenueGrid> {
    let mut rng = RngStream::Grid.rng(seed);
    VenueGrid::generate(geometry, &mut rng, |_, _| (5.0, 25.0))
}

/// Centered square with side `center_fraction` of the venue side whose cells
/// draw U[15, 25] dB; all other cells draw U[5, 10] dB.
pub fn gen_stadium(geometry: VenueGeometry, center_fraction: f64, seed: u64) -> Result<VenueGrid> {
    let square = CenterSquare::new(geometry, center_fraction)?;
    let mut rng = RngStream::Grid.rng(seed);
    let c = geometry.cell_m;
    VenueGrid::generate(geometry, &mut rng, |col, row| {
        let center = Position::new((col as f64 + 0.5) * c, (row as f64 + 0.5) * c);
        if square.contains(center) {
            (15.0, 25.0)
        } else {
            (5.0, 10.0)
        }
    })
}

/// High-SNR base for the failure environment: U[15, 25] dB everywhere.
pub fn gen_failure_base(geometry: VenueGeometry, seed: u64) -> Result<VenueGrid> {
    let mut rng = RngStream::Grid.rng(seed);
    VenueGrid::generate(geometry, &mut rng, |_, _| (15.0, 25.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterSquare {
    lo: Position,
    hi: Position,
}

impl CenterSquare {
    pub fn new(geometry: VenueGeometry, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidScenario(format!(
                "stadium center fraction {fraction} outside (0, 1]"
            )));
        }
        let (w, h) = (geometry.width_m, geometry.height_m);
        let (hw, hh) = (w * fraction / 2.0, h * fraction / 2.0);
        Ok(Self {
            lo: Position::new(w / 2.0 - hw, h / 2.0 - hh),
            hi: Position::new(w / 2.0 + hw, h / 2.0 + hh),
        })
    }

    pub fn contains(&self, pos: Position) -> bool {
        (self.lo.x..=self.hi.x).contains(&pos.x) && (self.lo.y..=self.hi.y).contains(&pos.y)
    }

    fn sample(&self, rng: &mut impl Rng) -> Position {
        Position::new(
            rng.random_range(self.lo.x..=self.hi.x),
            rng.random_range(self.lo.y..=self.hi.y),
        )
    }
}

/// Contiguous block of cells, in cell units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellBlock {
    pub col: usize,
    pub row: usize,
    pub cols: usize,
    pub rows: usize,
}

impl CellBlock {
    /// A square block covering `area_fraction` of the grid at a seeded position.
    pub fn random(grid: &VenueGrid, area_fraction: f64, seed: u64) -> Result<Self> {
        if !(area_fraction > 0.0 && area_fraction <= 1.0) {
            return Err(Error::InvalidScenario(format!(
                "failure area fraction {area_fraction} outside (0, 1]"
            )));
        }
        let side = area_fraction.sqrt();
        let cols = ((grid.cols() as f64 * side).round() as usize).clamp(1, grid.cols());
        let rows = ((grid.rows() as f64 * side).round() as usize).clamp(1, grid.rows());
        let mut rng = RngStream::FailureRegion.rng(seed);
        Ok(Self {
            col: rng.random_range(0..=grid.cols() - cols),
            row: rng.random_range(0..=grid.rows() - rows),
            cols,
            rows,
        })
    }

    fn cells(&self, grid: &VenueGrid) -> impl Iterator<Item = usize> + '_ {
        let cols = grid.cols();
        (self.row..self.row + self.rows)
            .flat_map(move |r| (self.col..self.col + self.cols).map(move |c| r * cols + c))
    }
}

/// A venue whose cell means may change inside a failure window.
#[derive(Debug, Clone, PartialEq)]
pub struct Venue {
    base: VenueGrid,
    failure: Option<FailureEvent>,
}

#[derive(Debug, Clone, PartialEq)]
struct FailureEvent {
    failed: VenueGrid,
    affected: Vec<usize>,
    t_start: u32,
    t_end: u32,
}

impl Venue {
    pub fn fixed(grid: VenueGrid) -> Self {
        Self {
            base: grid,
            failure: None,
        }
    }

    pub fn base(&self) -> &VenueGrid {
        &self.base
    }

    /// Grid in effect during interval `t`.
    pub fn grid_at(&self, t: u32) -> &VenueGrid {
        match &self.failure {
            Some(f) if (f.t_start..f.t_end).contains(&t) => &f.failed,
            _ => &self.base,
        }
    }

    pub fn mean_at(&self, cell: usize, t: u32) -> f64 {
        self.grid_at(t).mean(cell)
    }

    /// Cells whose mean drops during the failure window.
    pub fn affected_cells(&self) -> &[usize] {
        self.failure.as_ref().map_or(&[], |f| &f.affected)
    }

    pub fn failure_window(&self) -> Option<(u32, u32)> {
        self.failure.as_ref().map(|f| (f.t_start, f.t_end))
    }

    /// Writes `cell_x,cell_y,mean_db,t` for every rectangle at interval `t`.
    pub fn write_heatmap_csv<W: Write>(&self, t: u32, mut out: W) -> Result<()> {
        let grid = self.grid_at(t);
        writeln!(out, "cell_x,cell_y,mean_db,t")?;
        for (cell, mean) in grid.means().iter().enumerate() {
            let (x, y) = grid.cell_coords(cell);
            writeln!(out, "{x},{y},{mean:.3},{t}")?;
        }
        Ok(())
    }
}

/// Redraws the means of `region` from U[5, 10] dB during `[t_start, t_end)`;
/// outside the window the base means apply unchanged.
pub fn apply_failure(
    grid: VenueGrid,
    region: CellBlock,
    t_start: u32,
    t_end: u32,
    duration: u32,
    seed: u64,
) -> Result<Venue> {
    if !(t_start < t_end && t_end <= duration) {
        return Err(Error::InvalidScenario(format!(
            "failure window [{t_start}, {t_end}) not inside [0, {duration})"
        )));
    }
    if region.col + region.cols > grid.cols() || region.row + region.rows > grid.rows() {
        return Err(Error::InvalidScenario("failure region exceeds the grid".into()));
    }
    let mut rng = RngStream::FailureRegion.rng(seed);
    // Skip the draws that placed the block so the means use fresh values.
    rng.set_word_pos(1 << 20);
    let affected: Vec<usize> = region.cells(&grid).collect();
    let mut means = grid.means().to_vec();
    for &cell in &affected {
        means[cell] = rng.random_range(5.0..=10.0);
    }
    let failed = VenueGrid::from_means(grid.geometry(), means)?;
    Ok(Venue {
        base: grid,
        failure: Some(FailureEvent {
            failed,
            affected,
            t_start,
            t_end,
        }),
    })
}

/// One Gaussian draw around the mean of the rectangle holding `pos`,
/// quantized to 0.1 dB.
pub fn sample_ue_snr(
    venue: &Venue,
    pos: Position,
    t: u32,
    sigma_db: f64,
    rng: &mut impl Rng,
) -> SnrBin {
    let grid = venue.grid_at(t);
    let mean = grid.mean(grid.cell_index(pos));
    let z: f64 = rng.sample(StandardNormal);
    quantize(mean + sigma_db * z).expect("finite mean and draw")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Homogeneous,
    Stadium,
    Failure,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Homogeneous => "homogeneous",
            ScenarioKind::Stadium => "stadium",
            ScenarioKind::Failure => "failure",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homogeneous" => Ok(ScenarioKind::Homogeneous),
            "stadium" => Ok(ScenarioKind::Stadium),
            "failure" => Ok(ScenarioKind::Failure),
            other => Err(Error::Config(format!("unknown scenario `{other}`"))),
        }
    }
}

/// Stadium crowd schedule: walk in, stay, walk out (in intervals).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StadiumSchedule {
    pub inbound: u32,
    pub hold: u32,
    pub outbound: u32,
    /// Active fraction while everyone is at the venue edge.
    pub min_active: f64,
}

impl Default for StadiumSchedule {
    fn default() -> Self {
        // 12 min in, 3 min inside, 12 min out at 12 s per interval.
        Self {
            inbound: 60,
            hold: 15,
            outbound: 60,
            min_active: 0.1,
        }
    }
}

impl StadiumSchedule {
    /// 0 at the venue edge, 1 inside the stadium.
    pub fn progress(&self, t: u32) -> f64 {
        let (a, b, c) = (
            self.inbound,
            self.inbound + self.hold,
            self.inbound + self.hold + self.outbound,
        );
        if t < a {
            f64::from(t) / f64::from(a.max(1))
        } else if t < b {
            1.0
        } else if t < c {
            1.0 - f64::from(t - b) / f64::from(self.outbound.max(1))
        } else {
            0.0
        }
    }

    pub fn active_fraction(&self, t: u32) -> f64 {
        self.min_active + (1.0 - self.min_active) * self.progress(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureSpec {
    pub t_start: u32,
    pub t_end: u32,
    /// Share of the cells in the affected block.
    pub area_fraction: f64,
}

impl Default for FailureSpec {
    fn default() -> Self {
        // Minute 10 to minute 15.
        Self {
            t_start: 50,
            t_end: 75,
            area_fraction: 0.25,
        }
    }
}

/// Everything needed to rebuild a simulated environment bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// Registered UEs.
    pub m: usize,
    pub duration: u32,
    pub interval_seconds: f64,
    pub seed: u64,
    pub sigma_db: f64,
    pub geometry: VenueGeometry,
    pub stadium_center_fraction: f64,
    pub stadium: StadiumSchedule,
    /// Intervals for one leg of the back-and-forth walk.
    pub traverse_intervals: u32,
    pub failure: FailureSpec,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, m: usize, seed: u64) -> Self {
        Self {
            kind,
            m,
            duration: 150,
            interval_seconds: 12.0,
            seed,
            sigma_db: 5.0,
            geometry: VenueGeometry::default(),
            stadium_center_fraction: 0.5,
            stadium: StadiumSchedule::default(),
            traverse_intervals: 75,
            failure: FailureSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if self.duration == 0 {
            return Err(Error::InvalidScenario("duration must be positive".into()));
        }
        if self.m == 0 || self.m > u32::MAX as usize {
            return Err(Error::InvalidScenario(format!("m = {} UEs", self.m)));
        }
        if !(self.sigma_db >= 0.0 && self.sigma_db.is_finite()) {
            return Err(Error::InvalidScenario(format!("sigma = {}", self.sigma_db)));
        }
        if !(self.interval_seconds > 0.0) {
            return Err(Error::InvalidScenario("interval length must be positive".into()));
        }
        if self.traverse_intervals == 0 {
            return Err(Error::InvalidScenario("traverse period must be positive".into()));
        }
        if self.kind == ScenarioKind::Failure {
            let f = self.failure;
            if !(f.t_start < f.t_end && f.t_end <= self.duration) {
                return Err(Error::InvalidScenario(format!(
                    "failure window [{}, {}) not inside [0, {})",
                    f.t_start, f.t_end, self.duration
                )));
            }
        }
        Ok(())
    }

    pub fn build_venue(&self) -> Result<Venue> {
        self.validate()?;
        match self.kind {
            ScenarioKind::Homogeneous => Ok(Venue::fixed(gen_homogeneous(self.geometry, self.seed)?)),
            ScenarioKind::Stadium => Ok(Venue::fixed(gen_stadium(
                self.geometry,
                self.stadium_center_fraction,
                self.seed,
            )?)),
            ScenarioKind::Failure => {
                let base = gen_failure_base(self.geometry, self.seed)?;
                let block = CellBlock::random(&base, self.failure.area_fraction, self.seed)?;
                apply_failure(
                    base,
                    block,
                    self.failure.t_start,
                    self.failure.t_end,
                    self.duration,
                    self.seed,
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mobility {
    /// Walks `start -> end -> start` with `leg` intervals per direction.
    BackAndForth {
        start: Position,
        end: Position,
        leg: u32,
    },
    /// Walks from a point on the venue edge into the stadium and back.
    Stadium {
        edge: Position,
        center: Position,
        schedule: StadiumSchedule,
    },
}

impl Mobility {
    pub fn position(&self, t: u32) -> Position {
        match *self {
            Mobility::BackAndForth { start, end, leg } => {
                let phase = t % (2 * leg);
                let frac = if phase <= leg {
                    f64::from(phase) / f64::from(leg)
                } else {
                    f64::from(2 * leg - phase) / f64::from(leg)
                };
                start.lerp(end, frac)
            }
            Mobility::Stadium {
                edge,
                center,
                schedule,
            } => edge.lerp(center, schedule.progress(t)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activity {
    Always,
    /// Active during `[join, leave)`.
    Window { join: u32, leave: u32 },
    /// Active once the crowd's active fraction reaches `threshold`.
    Ramp {
        threshold: f64,
        schedule: StadiumSchedule,
    },
}

impl Activity {
    pub fn is_active(&self, t: u32) -> bool {
        match *self {
            Activity::Always => true,
            Activity::Window { join, leave } => (join..leave).contains(&t),
            Activity::Ramp {
                threshold,
                schedule,
            } => threshold < schedule.active_fraction(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeState {
    pub id: u32,
    pub mobility: Mobility,
    pub activity: Activity,
}

impl UeState {
    pub fn position(&self, t: u32) -> Position {
        self.mobility.position(t)
    }

    pub fn is_active(&self, t: u32) -> bool {
        self.activity.is_active(t)
    }
}

/// Mobility position of `ue` at interval `t`.
pub fn mobility_step(scenario: &Scenario, ue: &UeState, t: u32) -> Position {
    debug_assert!(t < scenario.duration);
    ue.position(t)
}

/// Whether `ue` receives the multicast during interval `t`.
pub fn activity_schedule(scenario: &Scenario, ue: &UeState, t: u32) -> bool {
    debug_assert!(t < scenario.duration);
    ue.is_active(t)
}

fn perimeter_point(geometry: VenueGeometry, rng: &mut impl Rng) -> Position {
    let (w, h) = (geometry.width_m, geometry.height_m);
    let s = rng.random_range(0.0..2.0 * (w + h));
    if s < w {
        Position::new(s, 0.0)
    } else if s < w + h {
        Position::new(w, s - w)
    } else if s < 2.0 * w + h {
        Position::new(2.0 * w + h - s, h)
    } else {
        Position::new(0.0, 2.0 * (w + h) - s)
    }
}

fn uniform_point(geometry: VenueGeometry, rng: &mut impl Rng) -> Position {
    Position::new(
        rng.random_range(0.0..=geometry.width_m),
        rng.random_range(0.0..=geometry.height_m),
    )
}

/// Builds every UE's mobility and activity for `scenario`.
pub fn build_ues(scenario: &Scenario) -> Result<Vec<UeState>> {
    scenario.validate()?;
    let m = scenario.m;
    let mut waypoints = RngStream::Waypoints.rng(scenario.seed);
    let mut activity_rng = RngStream::Activity.rng(scenario.seed);
    let geometry = scenario.geometry;

    let mobility: Vec<Mobility> = match scenario.kind {
        ScenarioKind::Homogeneous | ScenarioKind::Failure => (0..m)
            .map(|_| Mobility::BackAndForth {
                start: uniform_point(geometry, &mut waypoints),
                end: uniform_point(geometry, &mut waypoints),
                leg: scenario.traverse_intervals,
            })
            .collect(),
        ScenarioKind::Stadium => {
            let square = CenterSquare::new(geometry, scenario.stadium_center_fraction)?;
            (0..m)
                .map(|_| Mobility::Stadium {
                    edge: perimeter_point(geometry, &mut waypoints),
                    center: square.sample(&mut waypoints),
                    schedule: scenario.stadium,
                })
                .collect()
        }
    };

    let activity: Vec<Activity> = match scenario.kind {
        ScenarioKind::Homogeneous | ScenarioKind::Failure => {
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(&mut activity_rng);
            let mut activity = vec![Activity::Always; m];
            for &ue in &order[m / 2..] {
                let a = activity_rng.random_range(0..=scenario.duration);
                let b = activity_rng.random_range(0..=scenario.duration);
                activity[ue] = Activity::Window {
                    join: a.min(b),
                    leave: a.max(b),
                };
            }
            activity
        }
        ScenarioKind::Stadium => (0..m)
            .map(|_| Activity::Ramp {
                threshold: activity_rng.random::<f64>(),
                schedule: scenario.stadium,
            })
            .collect(),
    };

    Ok(mobility
        .into_iter()
        .zip(activity)
        .enumerate()
        .map(|(id, (mobility, activity))| UeState {
            id: id as u32,
            mobility,
            activity,
        })
        .collect())
}

/// Active UEs and their SNR during one reporting interval.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSnapshot {
    pub t: u32,
    /// Ids of the active UEs, ascending.
    pub ues: Vec<u32>,
    /// `snr[i]` belongs to `ues[i]`.
    pub snr: Vec<SnrBin>,
    /// Mean SNR of each active UE's rectangle.
    pub cell_means: Vec<f64>,
    /// Active UEs whose rectangle mean moved by more than `lipschitz_db`
    /// since the previous interval.
    pub mean_shift_violations: usize,
    /// Sum of |rectangle mean change| over active UEs that were tracked in
    /// the previous interval.
    pub mean_shift_total_db: f64,
    pub mean_shift_samples: usize,
}

impl IntervalSnapshot {
    pub fn active(&self) -> usize {
        self.ues.len()
    }
}

/// A built scenario: venue plus UE schedules.
#[derive(Debug, Clone)]
pub struct World {
    scenario: Scenario,
    venue: Venue,
    ues: Vec<UeState>,
}

impl World {
    pub fn new(scenario: Scenario) -> Result<Self> {
        let venue = scenario.build_venue()?;
        let ues = build_ues(&scenario)?;
        Ok(Self {
            scenario,
            venue,
            ues,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn venue(&self) -> &Venue {
        &self.venue
    }

    pub fn ues(&self) -> &[UeState] {
        &self.ues
    }

    pub fn active_count(&self, t: u32) -> usize {
        self.ues.iter().filter(|u| u.is_active(t)).count()
    }

    /// Time-averaged number of active UEs over the whole run.
    pub fn expected_active(&self) -> f64 {
        let d = self.scenario.duration;
        (0..d).map(|t| self.active_count(t) as f64).sum::<f64>() / f64::from(d)
    }

    /// Replays the scenario interval by interval.
    pub fn trace(&self, lipschitz_db: f64) -> Trace<'_> {
        Trace {
            world: self,
            rng: RngStream::SnrDraws.rng(self.scenario.seed),
            t: 0,
            lipschitz_db,
            prev_mean: vec![f64::NAN; self.ues.len()],
        }
    }
}

/// Iterator over [`IntervalSnapshot`]s of a [`World`].
pub struct Trace<'a> {
    world: &'a World,
    rng: ChaCha8Rng,
    t: u32,
    lipschitz_db: f64,
    prev_mean: Vec<f64>,
}

impl Iterator for Trace<'_> {
    type Item = IntervalSnapshot;

    fn next(&mut self) -> Option<IntervalSnapshot> {
        let t = self.t;
        if t >= self.world.scenario.duration {
            return None;
        }
        self.t += 1;
        let grid = self.world.venue.grid_at(t);
        let sigma = self.world.scenario.sigma_db;
        let mut snap = IntervalSnapshot {
            t,
            ..Default::default()
        };
        for ue in &self.world.ues {
            let idx = ue.id as usize;
            if !ue.is_active(t) {
                self.prev_mean[idx] = f64::NAN;
                continue;
            }
            let mean = grid.mean(grid.cell_index(ue.position(t)));
            let prev = self.prev_mean[idx];
            if prev.is_finite() {
                let shift = (mean - prev).abs();
                snap.mean_shift_samples += 1;
                snap.mean_shift_total_db += shift;
                if shift > self.lipschitz_db {
                    snap.mean_shift_violations += 1;
                }
            }
            self.prev_mean[idx] = mean;
            let z: f64 = self.rng.sample(StandardNormal);
            snap.ues.push(ue.id);
            snap.snr.push(quantize(mean + sigma * z).expect("finite draw"));
            snap.cell_means.push(mean);
        }
        Some(snap)
    }
}
