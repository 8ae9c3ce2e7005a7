//! Train the actuation predictor on fault-free runs of all six scenarios,
//! report held-out error, and demonstrate a prediction on a fresh window.
//!
//!     cargo run --release --example train_predictor

use adasim::mitigation::{predictor_train, Predictor, PredictorWindow, WINDOW_LEN};
use adasim::runner::{generate_training_traces, RunParams};

fn main() -> Result<(), adasim::SimError> {
    let params = RunParams::default();
    println!("generating fault-free traces (2 per scenario)...");
    let traces = generate_training_traces(2, 1, &params)?;
    println!(
        "{} traces, {} steps total",
        traces.len(),
        traces.iter().map(|t| t.steps.len()).sum::<usize>()
    );

    let trained = predictor_train(&traces, 1e-6, 1)?;
    println!(
        "held-out RMSE: accel {:.4} m/s^2, curvature {:.6} 1/m",
        trained.rmse_accel, trained.rmse_curvature
    );

    // Feed the first window of a training trace back through the model.
    let mut window = PredictorWindow::default();
    for frame in &traces[0].steps[..WINDOW_LEN] {
        window.push(*frame);
    }
    let (accel, curvature) = trained.predictor.predict(&window).expect("window is full");
    let actual = traces[0].steps[WINDOW_LEN];
    println!("predicted next command: accel {accel:.3} m/s^2, curvature {curvature:.5} 1/m");
    println!(
        "actual executed:        accel {:.3} m/s^2, curvature {:.5} 1/m",
        actual.accel, actual.curvature
    );

    // Round-trip through the on-disk format.
    let dir = std::env::temp_dir().join("adasim_example_model.txt");
    trained.predictor.save(&dir)?;
    let loaded = Predictor::load(&dir)?;
    assert_eq!(loaded, trained.predictor);
    println!("model saved and reloaded from {}", dir.display());
    Ok(())
}
