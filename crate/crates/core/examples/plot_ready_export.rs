//! Run one experiment, export the trajectories and denial markers, then read
//! them back and recompute the metric from the files alone.

use robust_nav::experiment::{
    evaluate_dir, export_run, load_denial, load_trajectory, render_rows, run_single, ExperimentConfig,
    TRAJ_REKF_FILE, DENIAL_FILE,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "run".into());
    let dir = std::path::Path::new(&dir);
    let run = run_single(&ExperimentConfig::default(), 2)?;
    export_run(&run, dir)?;

    let (t, rekf) = load_trajectory(dir.join(TRAJ_REKF_FILE))?;
    println!("{} rows, t = {} … {} s, last REKF position {:?}", rekf.len(), t[0], t[t.len() - 1], rekf[rekf.len() - 1].as_slice());
    for m in load_denial(dir.join(DENIAL_FILE))? {
        println!("{:?} outage {}–{} s = indices {}..{}", m.phase, m.start, m.end, m.k_start, m.k_end);
    }
    print!("{}", render_rows(&evaluate_dir(dir)?));
    Ok(())
}
