use iolap::Catalog;

fn fixture() -> Catalog {
    Catalog::load_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/catalog")).unwrap()
}

#[test]
fn queries_reproduce_printed_tables() {
    let c = fixture();
    for (q, t) in [("CN", "T_CN"), ("CO", "T_CO")] {
        let a = c.resolve_cube(q).unwrap();
        let b = c.resolve_cube(t).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.cells().iter().zip(b.cells()) {
            assert_eq!(x.coords, y.coords);
            assert!((x.values[0] - y.values[0]).abs() < 1e-9, "{q} {:?}", x.coords);
        }
    }
}
