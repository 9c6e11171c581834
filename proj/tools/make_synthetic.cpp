// Regenerates the bundled datasets under data/synthetic.
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "adasel/synthetic.hpp"
#include "adasel/trace_store.hpp"

int main(int argc, char** argv) {
  CLI::App app{"write the bundled synthetic datasets"};
  std::filesystem::path dir = "data/synthetic";
  std::uint64_t seed = 7;
  app.add_option("--dir", dir, "output directory");
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  namespace syn = adasel::synthetic;
  std::filesystem::create_directories(dir);
  syn::ComplementaryConfig cfg;
  cfg.seed = seed;
  adasel::save_dataset(syn::complementary(cfg), dir / "trace.csv", dir / "features.csv",
                       dir / "models.csv");
  adasel::save_dataset(syn::planted_disk({}), dir / "disk_trace.csv",
                       dir / "disk_features.csv");
  std::cout << "wrote " << dir.string() << '\n';
}
