//! Entropic transport between six points and two targets along a
//! decreasing ε ladder, next to the unregularized cost.

use fairtransport::transport::{sinkhorn, SinkhornConfig};
use ndarray::Array2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x: [f64; 6] = [0.0, 1.0, 5.0, 2.0, 9.0, 3.0];
    let targets = [2.0, 14.0 / 3.0];
    let cost = Array2::from_shape_fn((6, 2), |(i, j)| (x[i] - targets[j]).powi(2));
    let a = [1.0 / 6.0; 6];
    let b = [0.5, 0.5];

    // Unregularized optimum: the three smallest points go to the first target.
    let exact = (cost[[0, 0]] + cost[[1, 0]] + cost[[3, 0]] + cost[[2, 1]] + cost[[4, 1]] + cost[[5, 1]]) / 6.0;
    println!("exact transport cost {exact:.6}");
    for eps in [10.0, 1.0, 0.1, 0.01] {
        let plan = sinkhorn(cost.view(), &a, &b, SinkhornConfig::new(eps))?;
        println!(
            "ε = {eps:<5} cost {:.6}  iterations {:>4}  residual {:.1e}  converged {}",
            plan.transport_cost(cost.view()),
            plan.iterations,
            plan.marginal_residual,
            plan.converged
        );
    }
    let plan = sinkhorn(cost.view(), &a, &b, SinkhornConfig::new(0.1))?;
    println!("coupling at ε = 0.1:\n{:.4}", plan.coupling);
    Ok(())
}
