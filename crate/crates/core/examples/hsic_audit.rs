//! HSIC permutation audit of the raw and the debiased features.

use fairtransport::audit::audit;
use fairtransport::pipeline::{run_chain, Inputs};
use fairtransport::synth;
use fairtransport::transport::Method;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixture = synth::leaky_fixture(11);
    let inputs = Inputs {
        ontology: fixture.ontology.into_bytes(),
        binding: fixture.binding.into_bytes(),
        dataset: fixture.dataset.into_bytes(),
    };
    let chain = run_chain(&inputs, Method::Quantile1d, None, 999, 42, false)?;
    let x = chain.compiled.dataset.features()?;
    let raw = audit(x.values().view(), &chain.compiled.partition, 999, 42)?;

    for (name, report) in [("raw", &raw), ("fair", &chain.audit)] {
        println!(
            "{name:>4}: HSIC {:.3e}  p = {:.3}  (σ = {:.2}, {} permutations, seed {})",
            report.hsic.statistic, report.hsic.p_value, report.hsic.bandwidth, report.hsic.permutations, report.hsic.seed
        );
    }
    Ok(())
}
