use lodfem::coefficient::{make_checkerboard, CoefficientKind};
use lodfem::harness::{run_convergence, run_decay, ExperimentConfig, NodeSelector};
use lodfem::lod::{assemble_corrector_set, CorrectorMode, LodContext};
use lodfem::mesh::{build_uniform_mesh, refine_hierarchy};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn corrector_sets_do_not_depend_on_thread_count() {
    let h = refine_hierarchy(&build_uniform_mesh(8).unwrap(), 2).unwrap();
    let c = make_checkerboard(16, 1000.0, 4, h.fine()).unwrap();
    let ctx = LodContext::new(&h, &c, 1e-10).unwrap();
    for mode in [CorrectorMode::Global, CorrectorMode::Localized(2)] {
        let one = in_pool(1, || assemble_corrector_set(&ctx, mode).unwrap());
        let many = in_pool(4, || assemble_corrector_set(&ctx, mode).unwrap());
        assert_eq!(one, many);
    }
}

#[test]
fn csv_bytes_do_not_depend_on_thread_count() {
    let mut cfg = ExperimentConfig::default();
    cfg.fine_n = 32;
    cfg.coarse_n = vec![4, 8];
    cfg.levels = vec![1, 2];
    cfg.coefficient = CoefficientKind::Checkerboard { cell: 16, contrast: 100.0, seed: 2 };
    let a = in_pool(1, || run_convergence(&cfg).unwrap().to_csv());
    let b = in_pool(3, || run_convergence(&cfg).unwrap().to_csv());
    let c = run_convergence(&cfg).unwrap().to_csv();
    assert_eq!(a, b);
    assert_eq!(a, c);

    cfg.coarse_n = vec![8];
    let d1 = in_pool(1, || run_decay(&cfg, NodeSelector::Center).unwrap().to_csv());
    let d2 = in_pool(4, || run_decay(&cfg, NodeSelector::Center).unwrap().to_csv());
    assert_eq!(d1, d2);
}
