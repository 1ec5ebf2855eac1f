// Generates a synthetic corpus in the on-disk layout of the public data set,
// with the same ten user ids and per-user session counts. Useful for
// exercising the corpus-dependent pipeline paths end to end when the real
// data is not on hand. Not registered with ctest.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "mousedyn/rng.hpp"
#include "mousedyn/session.hpp"
#include "synthetic.hpp"

using namespace mousedyn;

namespace {

struct UserPlan {
  int id;
  int training, test_positive, test_negative;
};

// Per-user session counts of the public data set.
constexpr UserPlan kPlan[] = {
    {7, 7, 36, 37},  {9, 7, 23, 43},  {12, 7, 56, 49}, {15, 6, 45, 70}, {16, 6, 68, 38},
    {20, 7, 30, 20}, {21, 7, 37, 22}, {23, 6, 38, 33}, {29, 7, 43, 20}, {35, 5, 35, 73},
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr,
                 "usage: mock_corpus <dest-dir> [train-actions=150] [test-actions=25] [seed=1]\n");
    return 2;
  }
  const std::filesystem::path root = argv[1];
  const int train_actions = argc > 2 ? std::atoi(argv[2]) : 150;
  const int test_actions = argc > 3 ? std::atoi(argv[3]) : 25;
  const std::uint64_t seed = argc > 4 ? std::strtoull(argv[4], nullptr, 10) : 1;

  std::filesystem::remove_all(root);
  std::filesystem::create_directories(root);
  std::ofstream labels(root / "public_labels.csv");
  labels << "filename,is_illegal\n";

  Rng rng(derive_seed(seed, {kStreamSynthetic}));
  int serial = 1000000000;
  int files = 0;
  for (const UserPlan& plan : kPlan) {
    const auto st = testing::style_for_user(plan.id);
    const auto train_dir = root / "training_files" / ("user" + std::to_string(plan.id));
    const auto test_dir = root / "test_files" / ("user" + std::to_string(plan.id));
    std::filesystem::create_directories(train_dir);
    std::filesystem::create_directories(test_dir);

    for (int s = 0; s < plan.training; ++s) {
      const std::string fn = "session_" + std::to_string(++serial);
      write_session_file(train_dir / fn,
                         testing::synth_session(rng, plan.id, fn, train_actions, st));
      ++files;
    }
    for (int s = 0; s < plan.test_positive + plan.test_negative; ++s) {
      const bool illegal = s >= plan.test_positive;
      // Impostor sessions carry another user's kinematics.
      const int source = illegal ? kPlan[(plan.id + s) % 10].id : plan.id;
      const std::string fn = "session_" + std::to_string(++serial);
      write_session_file(test_dir / fn,
                         testing::synth_session(rng, plan.id, fn, test_actions,
                                                testing::style_for_user(source)));
      labels << fn << ',' << (illegal ? 1 : 0) << '\n';
      ++files;
    }
  }
  std::printf("wrote %d session files under %s\n", files, root.string().c_str());
  return 0;
}
