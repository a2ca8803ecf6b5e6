//! Remove a planted ZIP-code leak from credit scores with the 1-d quantile
//! projection and compare the conditional gaps before and after.

use fairtransport::audit::conditional_gaps;
use fairtransport::pipeline::{compile, project, Inputs};
use fairtransport::synth;
use fairtransport::transport::{conditional_mean_collapse_cost, Method};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixture = synth::leaky_fixture(7);
    let inputs = Inputs {
        ontology: fixture.ontology.into_bytes(),
        binding: fixture.binding.into_bytes(),
        dataset: fixture.dataset.into_bytes(),
    };
    let compiled = compile(&inputs, false)?;
    let x = compiled.dataset.features()?;
    let fair = project(&compiled, Method::Quantile1d, None)?;

    let before = conditional_gaps(x.values().view(), &compiled.partition)?;
    let after = conditional_gaps(fair.y.view(), &compiled.partition)?;
    println!("atoms: {:?}", compiled.partition.sizes());
    println!("before: mean gap {:.3}, W2 gap {:.3}", before.max_mean_gap, before.max_w2_gap_1d);
    println!("after:  mean gap {:.3}, W2 gap {:.3}", after.max_mean_gap, after.max_w2_gap_1d);
    println!(
        "reconstruction error {:.2} (atom-mean collapse would cost {:.2})",
        fair.reconstruction_error,
        conditional_mean_collapse_cost(&x, &compiled.partition)?
    );
    for s in &fair.per_atom_summary {
        println!("atom {}: {} rows, mean {:.2}", s.atom, s.size, s.mean[0]);
    }
    Ok(())
}
