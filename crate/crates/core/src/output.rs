//! `history.csv` rows and VTK snapshots.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::adapt::{run_adaptive, RunObserver, RunSummary, StepLog};
use crate::config::RunConfig;
use crate::estimators::TimeIndicatorBreakdown;
use crate::mesh::vtk::{write_vtk, VtkField};
use crate::mesh::Mesh;
use crate::recovery::scr_recover;
use crate::scheme::SimState;

const LEADING: [&str; 9] = [
    "step", "t", "tau", "nodes", "elements", "energy", "mass", "eta_time", "eta_space",
];

const TRAILING: [&str; 14] = [
    "recovery_n",
    "recovery_n1",
    "recovery_n2",
    "e_tilde",
    "alpha",
    "residual_eta1",
    "residual_eta2",
    "newton_iters",
    "time_retries",
    "space_iterations",
    "refined",
    "coarsened",
    "floor_hit",
    "space_limited",
];

/// The column names of `history.csv`, in order.
pub fn history_columns() -> Vec<&'static str> {
    LEADING
        .iter()
        .chain(TimeIndicatorBreakdown::NAMES.iter())
        .chain(TRAILING.iter())
        .copied()
        .collect()
}

pub fn history_header() -> String {
    history_columns().join(",")
}

/// One CSV row. Floats use the shortest round-trip form.
pub fn history_row(l: &StepLog) -> String {
    let mut f = vec![
        l.step.to_string(),
        format!("{:e}", l.t),
        format!("{:e}", l.tau),
        l.nodes.to_string(),
        l.elements.to_string(),
        format!("{:e}", l.energy),
        format!("{:e}", l.mass),
        format!("{:e}", l.eta_time),
        format!("{:e}", l.eta_space),
    ];
    f.extend(l.time.terms().iter().map(|v| format!("{v:e}")));
    f.extend(l.recovery.iter().map(|v| format!("{v:e}")));
    f.extend(
        [l.e_tilde, l.alpha, l.residual_eta1, l.residual_eta2]
            .iter()
            .map(|v| format!("{v:e}")),
    );
    f.extend(
        [l.newton_iterations, l.time_retries, l.space_iterations, l.refined, l.coarsened]
            .iter()
            .map(|v| v.to_string()),
    );
    f.push((l.floor_hit as u8).to_string());
    f.push((l.space_limited as u8).to_string());
    f.join(",")
}

/// Writes `mesh_XXXX.vtk` with `u`, `w`, `|Gu|` and optional cell `eta_k`.
pub fn write_snapshot(path: &Path, state: &SimState, eta_k: Option<&[f64]>) -> io::Result<()> {
    let mesh = state.mesh();
    let g = scr_recover(mesh, &state.u_function())
        .map(|g| g.magnitudes())
        .map_err(|e| io::Error::new(io::ErrorKind::Other, e.to_string()))?;
    let points = [
        VtkField { name: "u", values: state.u() },
        VtkField { name: "w", values: state.w() },
        VtkField { name: "grad_u_recovered", values: &g },
    ];
    let cells: Vec<VtkField> = eta_k
        .map(|e| VtkField { name: "eta_k", values: e })
        .into_iter()
        .collect();
    let mut out = BufWriter::new(File::create(path)?);
    let title = format!("step {} t = {:e}", state.step(), state.time());
    write_vtk(&mut out, mesh, &title, &points, &cells)?;
    out.flush()
}

/// Observer writing `history.csv` and snapshots into a directory.
pub struct RunWriter {
    dir: PathBuf,
    history: BufWriter<File>,
    every: usize,
    snapshots: Vec<PathBuf>,
    logs: Vec<StepLog>,
}

impl RunWriter {
    pub fn create(dir: &Path, every: usize) -> io::Result<RunWriter> {
        std::fs::create_dir_all(dir)?;
        let mut history = BufWriter::new(File::create(dir.join("history.csv"))?);
        writeln!(history, "{}", history_header())?;
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            history,
            every: every.max(1),
            snapshots: Vec::new(),
            logs: Vec::new(),
        })
    }

    pub fn snapshots(&self) -> &[PathBuf] {
        &self.snapshots
    }

    pub fn logs(&self) -> &[StepLog] {
        &self.logs
    }

    pub fn finish(mut self) -> io::Result<Vec<StepLog>> {
        self.history.flush()?;
        Ok(self.logs)
    }

    fn snapshot(&mut self, state: &SimState, eta_k: Option<&[f64]>) -> io::Result<()> {
        let path = self.dir.join(format!("mesh_{:04}.vtk", state.step()));
        write_snapshot(&path, state, eta_k)?;
        self.snapshots.push(path);
        Ok(())
    }
}

impl RunObserver for RunWriter {
    fn initial(&mut self, state: &SimState, _energy: f64) -> Result<(), String> {
        self.snapshot(state, None).map_err(|e| e.to_string())
    }

    fn step(&mut self, log: &StepLog, state: &SimState, eta_k: &[f64]) -> Result<(), String> {
        writeln!(self.history, "{}", history_row(log)).map_err(|e| e.to_string())?;
        self.history.flush().map_err(|e| e.to_string())?;
        if log.step % self.every == 0 {
            self.snapshot(state, Some(eta_k)).map_err(|e| e.to_string())?;
        }
        self.logs.push(log.clone());
        Ok(())
    }
}

/// Runs `cfg` on its criss-cross initial mesh, writing into `cfg.out`.
pub fn run_config(cfg: &RunConfig) -> crate::Result<(RunSummary, Vec<StepLog>)> {
    cfg.validate()?;
    let p = &cfg.problem;
    let mesh = Mesh::criss_cross(p.domain, p.cells, p.cells)?;
    let mut writer = RunWriter::create(&cfg.out, cfg.snapshot_every)?;
    let summary = run_adaptive(mesh, &|x, y| p.eval(x, y), p.eps, &p.adapt, &mut writer)?;
    Ok((summary, writer.finish()?))
}
