use std::process::Command;

fn main() {
    println!("cargo:rerun-if-changed=../../.git/HEAD");
    println!("cargo:rerun-if-changed=../../.git/index");
    let described = Command::new("git")
        .args(["describe", "--tags", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty());
    let version = match described {
        Some(d) => format!("v{}-g{}", env!("CARGO_PKG_VERSION"), d.trim_start_matches('v')),
        None => format!("v{}-unknown", env!("CARGO_PKG_VERSION")),
    };
    println!("cargo:rustc-env=NLCTL_VERSION={version}");
}
