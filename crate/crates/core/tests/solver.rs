use proptest::prelude::*;

use wronskian_lab::lattice::{binomial, Convention};
use wronskian_lab::wronskian::{self, SolveOptions};
use wronskian_lab::{c64, ChainConfig, Complex64, SpinSector};

fn cross() -> SolveOptions {
    SolveOptions {
        cross_match: true,
        ..SolveOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    // every sector of a random inhomogeneous chain is solved completely and
    // each solution belongs to a distinct eigenvector
    #[test]
    fn random_chains_are_complete(
        re in proptest::collection::vec(-0.8f64..0.8, 3),
        im in proptest::collection::vec(-0.8f64..0.8, 3),
        r in 0.6f64..1.6,
        phi in 0.25f64..2.9,
    ) {
        let inhom: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| c64(a, b)).collect();
        let cfg = ChainConfig::new(3, inhom, Complex64::from_polar(r, phi), Convention::Lambda).unwrap();
        prop_assume!(cfg.min_separation() > 0.05);
        for sector in SpinSector::all(3) {
            let pairs = wronskian::solve_sector(&cfg, sector, &cross()).unwrap();
            let n = sector.n_down(3).unwrap();
            prop_assert_eq!(pairs.len(), binomial(3, n));
            let mut idx: Vec<usize> = pairs.iter().map(|p| p.oracle_index.unwrap()).collect();
            idx.sort_unstable();
            idx.dedup();
            prop_assert_eq!(idx.len(), pairs.len());
            for p in &pairs {
                prop_assert!(p.wronskian_residual < 1e-10);
            }
        }
    }
}

#[test]
fn homogeneous_eight_sites_on_both_sides_of_the_circle() {
    for omega in [Complex64::from_polar(1.3, 0.9), Complex64::from_polar(0.8, -2.1)] {
        let cfg = ChainConfig::homogeneous(8, omega).unwrap();
        let rep = wronskian::solve_sector_report(&cfg, SpinSector::new(0), &cross()).unwrap();
        assert!(rep.lost.is_empty(), "{:?}", rep.lost);
        assert_eq!(rep.pairs.len(), 70);
        assert!(rep.min_separation > 1e-6);
    }
}

#[test]
fn ten_sites_middle_sector() {
    let cfg = ChainConfig::with_phi(10, 0.7).unwrap();
    let rep = wronskian::solve_sector_report(&cfg, SpinSector::new(0), &SolveOptions::default()).unwrap();
    assert!(rep.lost.is_empty(), "{:?}", rep.lost);
    assert_eq!(rep.pairs.len(), 252);
    for p in &rep.pairs {
        assert!(p.wronskian_residual < 1e-10);
    }
}

#[test]
fn spin_reversal_exchanges_q_plus_and_q_minus() {
    let omega = Complex64::from_polar(1.0, 0.7);
    let fwd = wronskian::solve_sector(&ChainConfig::homogeneous(4, omega).unwrap(), SpinSector::new(2), &SolveOptions::default()).unwrap();
    let bwd = wronskian::solve_sector(&ChainConfig::homogeneous(4, omega.inv()).unwrap(), SpinSector::new(-2), &SolveOptions::default()).unwrap();
    let d = wronskian::spin_reversal_bijection(&fwd, &bwd).expect("bijection");
    assert!(d < 1e-8, "{d}");
}
