use std::collections::HashSet;

use superroots::num::{q, qf};
use superroots::rootsys::*;

fn all_small() -> Vec<TypeDescriptor> {
    let mut v = supported_descriptors(4);
    for l in [q(1), q(2), qf(-1, 2), qf(1, 3), q(-3)] {
        v.push(TypeDescriptor::d21(l));
    }
    v
}

#[test]
fn every_table_entry_satisfies_the_axioms() {
    for d in all_small() {
        let r = build(&d).unwrap();
        let rep = r.check_axioms();
        assert!(rep.passed(), "{}: {:?}", d, &rep.violations[..rep.violations.len().min(3)]);
    }
}

#[test]
fn recognition_round_trips() {
    for d in all_small() {
        let r = build(&d).unwrap();
        assert_eq!(recognize(&r).unwrap(), d.canonical(), "{}", d);
    }
}

#[test]
fn integral_bases_exist() {
    for d in all_small() {
        let r = build(&d).unwrap();
        let pi = integral_base(&r).unwrap_or_else(|e| panic!("{}: {}", d, e));
        assert_eq!(pi.roots.len(), r.rank());
        assert!(is_lattice_basis(&r, &pi.roots));
    }
}

#[test]
fn reflections_permute_roots() {
    for d in all_small() {
        let r = build(&d).unwrap();
        let set: HashSet<&LatticeVector> = r.roots.iter().collect();
        for a in r.real_roots() {
            for b in &r.roots {
                assert!(set.contains(&r.reflect(&a, b).unwrap()), "{}", d);
            }
        }
    }
}

#[test]
fn nonsingular_roots_form_one_signed_orbit() {
    for d in all_small() {
        let r = build(&d).unwrap();
        let Some(ds) = r.delta_star.clone() else { continue };
        let mut orb: HashSet<LatticeVector> = r.weyl_orbit(&ds).into_iter().collect();
        let neg: Vec<LatticeVector> = orb.iter().map(|v| v.neg()).collect();
        orb.extend(neg);
        let ns: HashSet<LatticeVector> = r.nonsingular_roots().into_iter().collect();
        assert_eq!(orb, ns, "{}", d);
    }
}

/// Families where two non-orthogonal nonsingular roots can have both sum
/// and difference in R (besides A(1,1) and BC(1,1)).
fn sum_and_difference_allowed(d: &TypeDescriptor) -> bool {
    let c = d.canonical();
    matches!(c.family, Family::All | Family::C1T | Family::CTT | Family::BCTT) && (c.family != Family::All || c.ranks == [1])
}

#[test]
fn nonsingular_pairs_have_a_unique_sign() {
    let mut seen_exception = false;
    for d in all_small() {
        let r = build(&d).unwrap();
        let ns = r.nonsingular_roots();
        for a in &ns {
            for b in &ns {
                if r.ip(a, b) == q(0) {
                    continue;
                }
                let plus = r.contains(&a.add(b));
                let minus = r.contains(&a.sub(b));
                assert!(plus || minus, "{}", d);
                if plus && minus {
                    assert!(sum_and_difference_allowed(&d), "{}", d);
                    seen_exception = true;
                }
            }
        }
    }
    assert!(seen_exception);
}
