#[test]
fn dbg_rigidity_combos() {
    use helioseis::lsp::{self, Stability};
    use helioseis::model::RadialModel;
    use helioseis::profile::Profile;
    use helioseis::rigidity::{self, DeformationFamily};
    let bases = [
        ("const", RadialModel::constant(0.2, 3, 1.0).unwrap()),
        ("2-r", RadialModel::polynomial(0.2, 3, vec![2.0, -1.0]).unwrap()),
    ];
    let bumps = [
        ("(r-R)(1-r)", Profile::Polynomial(vec![-0.2, 1.2, -1.0])),
        ("1", Profile::Constant(1.0)),
        ("r^2", Profile::Polynomial(vec![0.0, 0.0, 1.0])),
    ];
    for (bn, base) in &bases {
        let orbits: Vec<_> = lsp::enumerate_lsp(base, 5)
            .unwrap()
            .into_iter()
            .filter(|o| o.stability == Stability::Stable)
            .collect();
        for (hn, bump) in &bumps {
            let fam = DeformationFamily::new(base.clone(), bump.clone());
            for o in orbits.iter().take(2) {
                match rigidity::length_derivative_check(&fam, o) {
                    Ok(c) => println!(
                        "{bn:6} h={hn:12} ({},{}) r={:.4}: lhs={:+.8e} rhs={:+.8e} resid={:.2e}",
                        o.m, o.n, o.parameter, c.lhs, c.rhs, c.residual
                    ),
                    Err(e) => println!("{bn:6} h={hn:12} ({},{}): ERR {e}", o.m, o.n),
                }
            }
        }
    }
}
