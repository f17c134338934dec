use csrbf::coarse::CoarseBasisKind;
use csrbf::imaging::{
    load_image, psnr, reconstruct, save_image, synthetic_pattern, CenterSelection, RasterImage,
    ReconstructionOptions, SolverChoice,
};
use csrbf::solvers::SolverConfig;
use csrbf::Error;

fn options(selection: CenterSelection, solver: SolverChoice) -> ReconstructionOptions {
    ReconstructionOptions {
        selection,
        radius: 0.1,
        solver,
        config: SolverConfig::new(vec![1e-3, 1e-6], 3000).unwrap(),
    }
}

#[test]
fn raster_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for channels in [1, 3] {
        let img = synthetic_pattern(13, 7, channels).unwrap();
        for ext in ["pgm", "ppm", "png"] {
            if (ext == "pgm") != (channels == 1) && ext != "png" {
                continue;
            }
            let path = dir.path().join(format!("img{channels}.{ext}"));
            save_image(&path, &img).unwrap();
            let back = load_image(&path).unwrap();
            assert_eq!(back, img, "{ext}");
        }
    }
}

#[test]
fn pgm_header_and_payload() {
    let dir = tempfile::tempdir().unwrap();
    let img = RasterImage::from_bytes(3, 2, 1, &[0, 64, 128, 192, 255, 7]).unwrap();
    let path = dir.path().join("tiny.pgm");
    save_image(&path, &img).unwrap();
    let raw = std::fs::read(&path).unwrap();
    assert_eq!(&raw[..11], b"P5\n3 2\n255\n");
    assert_eq!(&raw[11..], &[0, 64, 128, 192, 255, 7]);

    let commented = [b"P5\n# comment\n3 2\n255\n".as_slice(), &raw[11..]].concat();
    let path2 = dir.path().join("commented.pgm");
    std::fs::write(&path2, commented).unwrap();
    assert_eq!(load_image(&path2).unwrap(), img);
}

#[test]
fn malformed_files_are_format_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.pgm");
    std::fs::write(&path, b"P5\n3 2\n65535\n").unwrap();
    assert!(matches!(load_image(&path), Err(Error::Format { .. })));
    std::fs::write(&path, b"P5\n3 2\n255\n\x01").unwrap();
    assert!(matches!(load_image(&path), Err(Error::Format { .. })));
    assert!(matches!(load_image(dir.path().join("missing.pgm")), Err(Error::Io(_))));
}

#[test]
fn all_centers_reconstruction_is_exact() {
    let img = synthetic_pattern(16, 16, 1).unwrap();
    let rec = reconstruct(&img, &options(CenterSelection::All, SolverChoice::Direct)).unwrap();
    assert_eq!(rec.n_sites, 256);
    let db = psnr(&img, &rec.image).unwrap();
    assert!(db > 100.0, "{db}");
    assert_eq!(psnr(&img, &rec.image.quantized()).unwrap(), f64::INFINITY);
}

#[test]
fn gray_replicated_to_rgb_gives_identical_channels() {
    let gray = synthetic_pattern(24, 24, 1).unwrap();
    let rgb = gray.gray_to_rgb().unwrap();
    let solver = SolverChoice::Gcr {
        kind: CoarseBasisKind::Cosine,
        size: 4,
        orthonormalize: false,
    };
    let rec_rgb = reconstruct(&rgb, &options(CenterSelection::Stride(2), solver)).unwrap();
    let rec_gray = reconstruct(&gray, &options(CenterSelection::Stride(2), solver)).unwrap();
    for c in 0..3 {
        assert_eq!(rec_rgb.image.plane(c), rec_gray.image.plane(0));
    }
}

#[test]
fn coarse_correction_does_not_change_the_image() {
    let img = synthetic_pattern(40, 40, 1).unwrap();
    let plain = SolverChoice::Gcr {
        kind: CoarseBasisKind::Chebyshev,
        size: 0,
        orthonormalize: false,
    };
    let deflated = SolverChoice::Gcr {
        kind: CoarseBasisKind::Chebyshev,
        size: 8,
        orthonormalize: false,
    };
    let a = reconstruct(&img, &options(CenterSelection::Stride(2), plain)).unwrap();
    let b = reconstruct(&img, &options(CenterSelection::Stride(2), deflated)).unwrap();
    let pa = psnr(&img, &a.image).unwrap();
    let pb = psnr(&img, &b.image).unwrap();
    assert!((pa - pb).abs() < 0.01, "{pa} vs {pb}");
    assert!(pa > 20.0);
}

#[test]
fn random_selection_is_seeded_and_sized() {
    let sel = CenterSelection::Random {
        fraction: 0.1,
        seed: 42,
    };
    let a = sel.select(64, 64).unwrap();
    assert_eq!(a.len(), 409);
    assert_eq!(a, sel.select(64, 64).unwrap());
    let mut dedup = a.clone();
    dedup.dedup();
    assert_eq!(dedup.len(), a.len());
    assert!(a.iter().all(|&(c, r)| c < 64 && r < 64));
    let other = CenterSelection::Random {
        fraction: 0.1,
        seed: 43,
    };
    assert_ne!(a, other.select(64, 64).unwrap());
    assert_eq!(sel.to_string().parse::<CenterSelection>().unwrap(), sel);
}

#[test]
fn stride_selection_layout() {
    let px = CenterSelection::Stride(3).select(7, 4).unwrap();
    assert_eq!(px, vec![(0, 0), (3, 0), (6, 0), (0, 3), (3, 3), (6, 3)]);
    assert!(CenterSelection::Stride(0).select(4, 4).is_err());
}

#[test]
fn psnr_reference_values() {
    let a = RasterImage::new(2, 1, 1, vec![0.0, 1.0]).unwrap();
    let b = RasterImage::new(2, 1, 1, vec![0.1, 1.0]).unwrap();
    // MSE = 0.005
    let want = 10.0 * (1.0f64 / 0.005).log10();
    assert!((psnr(&a, &b).unwrap() - want).abs() < 1e-12);
    assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    let c = RasterImage::new(1, 1, 1, vec![0.0]).unwrap();
    assert!(psnr(&a, &c).is_err());
}
