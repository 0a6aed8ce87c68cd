//! Learn the tolerance on the first 30 s of a flight with an 8 s outage and
//! print the loss curve over the candidate grid.

use robust_nav::experiment::{initial_belief, load_or_simulate, prepare_streams, train, ExperimentConfig};
use robust_nav::filter::NavModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::default();
    if let Some(s) = std::env::args().nth(1) {
        cfg.training.denial_duration = s.parse()?;
    }
    let model = NavModel::new(cfg.noise.clone(), cfg.jacobians)?;
    let streams = prepare_streams(&cfg, load_or_simulate(&cfg, 5)?)?;
    let init = initial_belief(&cfg, &model, &streams.flight)?;
    let outcome = train(&cfg, &model, &streams, &init)?;
    let report = &outcome.report;

    let best = report.losses[report.c_hat_index()].unwrap_or(f64::NAN);
    for (c, loss) in report.grid.values().iter().zip(&report.losses) {
        match loss {
            Some(l) => {
                let bar = "#".repeat(((l - best) / best * 400.0).min(60.0) as usize);
                println!("c = {c:6.4}  loss = {l:8.5}  {bar}");
            }
            None => println!("c = {c:6.4}  filter failed"),
        }
    }
    println!("training denial {} s over N = {} steps: c_hat = {:.4}", cfg.training.denial_duration, report.n, report.c_hat);
    Ok(())
}
