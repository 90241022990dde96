//! Optional dataset downloader. Fetches the four gzip-compressed IDX
//! archives, decompresses them and verifies the published decompressed
//! sizes and magic numbers. Library code never touches the network;
//! this command exists so users can populate `idx` sources.

use std::io::Read;
use std::path::Path;

use crate::error::CliError;
use crate::output::RunDir;

const FILES: [(&str, u64, u32); 4] = [
    ("train-images-idx3-ubyte", 47_040_016, 0x0000_0803),
    ("train-labels-idx1-ubyte", 60_008, 0x0000_0801),
    ("t10k-images-idx3-ubyte", 7_840_016, 0x0000_0803),
    ("t10k-labels-idx1-ubyte", 10_008, 0x0000_0801),
];

const MNIST_BASE: &str = "https://storage.googleapis.com/cvdf-datasets/mnist/";
const FASHION_BASE: &str =
    "http://fashion-mnist.s3-website.eu-central-1.amazonaws.com/";

pub fn run(out: &Path, fashion: bool, base_url: Option<&str>) -> Result<(), CliError> {
    let base = base_url
        .map(str::to_string)
        .unwrap_or_else(|| (if fashion { FASHION_BASE } else { MNIST_BASE }).to_string());
    let mut run = RunDir::create(out)?;
    for (name, expected_size, expected_magic) in FILES {
        let url = format!("{base}{name}.gz");
        let mut response = ureq::get(&url)
            .call()
            .map_err(|e| CliError::io(format!("download failed for {url}: {e}")))?;
        let mut compressed = Vec::new();
        response
            .body_mut()
            .as_reader()
            .read_to_end(&mut compressed)
            .map_err(|e| CliError::io(format!("read failed for {url}: {e}")))?;
        let mut decoder = flate2::read::GzDecoder::new(&compressed[..]);
        let mut bytes = Vec::new();
        decoder
            .read_to_end(&mut bytes)
            .map_err(|e| CliError::io(format!("gunzip failed for {name}: {e}")))?;
        if bytes.len() as u64 != expected_size {
            return Err(CliError::io(format!(
                "{name}: decompressed size {} does not match the published {expected_size}",
                bytes.len()
            )));
        }
        let magic = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]);
        if magic != expected_magic {
            return Err(CliError::io(format!(
                "{name}: magic {magic:#010x} does not match {expected_magic:#010x}"
            )));
        }
        std::fs::write(run.file(name), &bytes)
            .map_err(|e| CliError::io(format!("cannot write {name}: {e}")))?;
        run.record_output(name);
        println!("fetched {name} ({} bytes)", bytes.len());
    }
    #[derive(serde::Serialize)]
    struct FetchConfig {
        base_url: String,
        fashion: bool,
    }
    run.finish(
        "fetch-mnist",
        &FetchConfig {
            base_url: base,
            fashion,
        },
    )
}
