use proptest::prelude::*;
use superroots::num::{q, Q};
use superroots::rootsys::{self, build, is_isomorphic, json, TypeDescriptor};

fn descriptors() -> Vec<TypeDescriptor> {
    rootsys::supported_descriptors(3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cartan_integers_are_integral(i in 0usize..1000, a in 0usize..1000, b in 0usize..1000) {
        let ds = descriptors();
        let r = build(&ds[i % ds.len()]).unwrap();
        let real = r.real_roots();
        let alpha = &real[a % real.len()];
        let beta = &r.roots[b % r.roots.len()];
        let c = q(2) * r.ip(beta, alpha) / r.norm(alpha);
        prop_assert!(c.is_integer());
        prop_assert!(r.contains(&r.reflect(alpha, beta).unwrap()));
    }

    #[test]
    fn json_round_trips(i in 0usize..1000) {
        let ds = descriptors();
        let r = build(&ds[i % ds.len()]).unwrap();
        let back = json::rootsys_from_json(&json::rootsys_to_json(&r)).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn scaling_the_form_keeps_the_isomorphism_class(i in 0usize..1000, num in 1i64..6, den in 1i64..6, neg in any::<bool>()) {
        let ds = descriptors();
        let r = build(&ds[i % ds.len()]).unwrap();
        let k = Q::new(num.into(), den.into()) * if neg { q(-1) } else { q(1) };
        let s = r.with_form(r.form.scaled(&k));
        let iso = is_isomorphic(&r, &s).unwrap();
        // systems with a form-reversing symmetry may answer -k
        prop_assert!(iso.k == k || iso.k == -k.clone());
        prop_assert!(iso.verify(&r, &s));
    }
}
