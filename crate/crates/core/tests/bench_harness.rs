use depthgraph::bench::{discover_dataset, run_benchmark, spectrum_study, BenchmarkOptions};
use depthgraph::config::ConfigFile;
use depthgraph::imaging::{psnr, read_depth, save_rgbd, synthetic_scene};

fn options(out: &std::path::Path, workers: usize) -> BenchmarkOptions {
    BenchmarkOptions {
        sigmas: vec![15.0, 35.0],
        seeds: vec![1, 2],
        config: ConfigFile {
            iterations: Some(3),
            ..ConfigFile::default()
        },
        workers,
        timing_runs: 1,
        output_dir: out.to_path_buf(),
    }
}

#[test]
fn report_matches_saved_files_and_reruns_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    for (name, seed) in [("alpha", 1), ("beta", 2)] {
        let dir = data.join(name);
        std::fs::create_dir_all(&dir).unwrap();
        let scene = synthetic_scene(40, 30, seed).unwrap();
        save_rgbd(&scene.image, dir.join("color.png"), dir.join("depth.png")).unwrap();
    }
    let entries = discover_dataset(&data).unwrap();
    assert_eq!(entries.iter().map(|e| e.name.as_str()).collect::<Vec<_>>(), ["alpha", "beta"]);

    let first = run_benchmark(&entries, &options(&tmp.path().join("run1"), 1)).unwrap();
    let second = run_benchmark(&entries, &options(&tmp.path().join("run2"), 2)).unwrap();
    assert_eq!(first.cells.len(), 4);

    for (a, b) in first.cells.iter().zip(&second.cells) {
        assert!(a.error.is_none(), "{:?}", a.error);
        assert_eq!((a.image.as_str(), a.sigma), (b.image.as_str(), b.sigma));
        assert_eq!(a.noisy_psnr, b.noisy_psnr);
        assert_eq!(a.denoised_psnr, b.denoised_psnr);
        assert!(a.mean_denoised_psnr > a.mean_noisy_psnr);

        let entry = entries.iter().find(|e| e.name == a.image).unwrap();
        let clean = read_depth(&entry.depth).unwrap();
        for (i, path) in a.denoised_files.iter().enumerate() {
            let saved = read_depth(path).unwrap();
            assert_eq!(psnr(&clean, &saved).unwrap(), a.denoised_psnr[i]);
        }
        for (i, path) in a.noisy_files.iter().enumerate() {
            let saved = read_depth(path).unwrap();
            assert_eq!(psnr(&clean, &saved).unwrap(), a.noisy_psnr[i]);
        }
    }

    let jsonl = first.to_jsonl();
    assert_eq!(jsonl.lines().count(), 4);
    for line in jsonl.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["mean_denoised_psnr"].is_number());
    }
    assert!(first.to_table().contains("alpha"));
}

#[test]
fn unreadable_image_fails_its_cells_only() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let good = data.join("good");
    let bad = data.join("bad");
    std::fs::create_dir_all(&good).unwrap();
    std::fs::create_dir_all(&bad).unwrap();
    let scene = synthetic_scene(32, 24, 3).unwrap();
    save_rgbd(&scene.image, good.join("color.png"), good.join("depth.png")).unwrap();
    std::fs::copy(good.join("color.png"), bad.join("color.png")).unwrap();
    std::fs::write(bad.join("depth.png"), b"garbage").unwrap();

    let entries = discover_dataset(&data).unwrap();
    let report = run_benchmark(&entries, &options(&tmp.path().join("out"), 1)).unwrap();
    assert!(report.cells.iter().filter(|c| c.image == "bad").all(|c| c.error.is_some()));
    assert!(report.cells.iter().filter(|c| c.image == "good").all(|c| c.error.is_none()));
}

#[test]
fn spectrum_study_without_sigma_is_clean_only() {
    let scene = synthetic_scene(32, 24, 4).unwrap();
    let study = spectrum_study(&scene.image, None, 0, 0.1).unwrap();
    assert!(study.noisy.is_none() && study.noisy_low_band.is_none());
    assert!(study.clean_low_band > 0.9);

    let noisy = spectrum_study(&scene.image, Some(30.0), 1, 0.1).unwrap();
    assert!(noisy.noisy_low_band.unwrap() < noisy.clean_low_band);
}
