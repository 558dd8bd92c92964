use fluxeks::mlp::TrainConfig;
use fluxeks::physics::{CellIndex, Mesh, PhysicalParams};
use fluxeks::pipeline::{load_or_train_inverse, run_inverse_ann, InversionConfig};
use fluxeks::signals::{builtin_testing_manifest, builtin_training_manifest};

fn main() {
    let cache = std::path::PathBuf::from("target/tmp/fluxeks-test-cache");
    let mesh = Mesh::default();
    let params = PhysicalParams::default();
    let sensor = CellIndex::new(20, 44);
    let testing = builtin_testing_manifest().render(mesh.dt).unwrap();
    for (np, train_noise) in [(18usize, 1.0), (30, 1.0), (30, 2.0), (45, 2.0), (60, 2.0)] {
        let model = load_or_train_inverse(
            Some(&cache), &builtin_training_manifest(), sensor, np, 18,
            &mesh, &params, train_noise, &TrainConfig::default(),
        ).unwrap();
        for m in [2.0, 15.0] {
            let mut aes = Vec::new();
            for seed in [1u64, 2, 3] {
                let mut cfg = InversionConfig::new(sensor);
                cfg.noise_level = m;
                cfg.n_f = 18;
                cfg.seed = seed;
                let r = run_inverse_ann(&testing, &model, &cfg).unwrap();
                aes.push(r.ae);
            }
            aes.sort_by(|a, b| a.partial_cmp(b).unwrap());
            eprintln!("np {np} tn {train_noise} m {m:4}: median {:.4}", aes[1]);
        }
    }
}
