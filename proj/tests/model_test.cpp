#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <cstring>
#include <random>
#include <set>

#include "grad_check.hpp"
#include "stunet/adam.hpp"
#include "stunet/errors.hpp"
#include "stunet/model.hpp"
#include "test_graphs.hpp"

using namespace stunet;
using stunet::testing::max_gradient_error;
using stunet::testing::project;
using stunet::testing::random_connected_graph;
using stunet::testing::random_tensor;

namespace {

Graph path4() { return Graph::from_edges(4, {{0, 1, 3.0}, {1, 2, 1.0}, {2, 3, 2.0}}); }

STUNetConfig tiny_config() {
  STUNetConfig c;
  c.order = 2;
  c.pool_level = 1;
  c.dilation = 2;
  c.hidden = {3, 3, 3};
  c.input_length = 3;
  c.horizon = 2;
  c.seed = 5;
  return c;
}

Sequence random_sequence(std::size_t t, const Shape& shape, std::mt19937_64& rng,
                         bool requires_grad = false) {
  Sequence s;
  for (std::size_t i = 0; i < t; ++i) s.push_back(random_tensor(shape, rng, -1, 1, requires_grad));
  return s;
}

bool identical(const Sequence& a, const Sequence& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].shape() != b[i].shape()) return false;
    for (std::size_t j = 0; j < a[i].size(); ++j)
      if (a[i][j] != b[i][j]) return false;
  }
  return true;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("stunet_model_test_" + name);
}

}  // namespace

TEST(Config, ValidateRejectsBadFields) {
  auto c = tiny_config();
  c.validate();
  auto bad = c;
  bad.order = 0;
  EXPECT_THROW(bad.validate(), ModelError);
  bad = c;
  bad.dilation = 0;
  EXPECT_THROW(bad.validate(), ModelError);
  bad = c;
  bad.input_length = 0;
  EXPECT_THROW(bad.validate(), ModelError);
  bad = c;
  bad.horizon = 0;
  EXPECT_THROW(bad.validate(), ModelError);
  bad = c;
  bad.hidden = {3, 3};
  EXPECT_THROW(bad.validate(), ModelError);
  EXPECT_THROW(STUNet(bad, path4()), ModelError);
}

TEST(Config, TextRoundTrip) {
  auto c = tiny_config();
  c.unpool = UnpoolMode::weighted_deconv;
  c.pool_mode = ReduceMode::mean;
  c.layer_norm = false;
  STUNetConfig d;
  for (const auto& [k, v] : c.to_pairs()) EXPECT_TRUE(d.set(k, v)) << k;
  EXPECT_EQ(d.to_pairs(), c.to_pairs());
  EXPECT_FALSE(d.set("epochs", "3"));
  EXPECT_THROW(d.set("order", "two"), UsageError);
  EXPECT_THROW(d.set("unpool", "nearest"), UsageError);
  EXPECT_TRUE(d.set("hidden", "16"));
  EXPECT_EQ(d.hidden, (std::vector<std::size_t>{16, 16, 16}));
}

TEST(Variant, AdjustsPoolingAndDilation) {
  STUNetConfig c;
  c.pool_level = 2;
  c.dilation = 2;
  EXPECT_EQ(variant(c, Variant::gcgru).pool_level, 0u);
  EXPECT_EQ(variant(c, Variant::gcgru).dilation, 1u);
  auto s = variant(c, Variant::s_unet);
  EXPECT_EQ(s.pool_level, 2u);
  EXPECT_EQ(s.dilation, 1u);
  auto t = variant(c, Variant::t_unet);
  EXPECT_EQ(t.pool_level, 0u);
  EXPECT_EQ(t.dilation, 2u);
  EXPECT_EQ(variant(c, Variant::st_unet).to_pairs(), c.to_pairs());
  for (auto v : {Variant::gcgru, Variant::t_unet, Variant::s_unet, Variant::st_unet})
    EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_THROW(parse_variant("UNet"), UsageError);
}

TEST(Build, PlainHasSingleLaplacian) {
  auto c = variant(tiny_config(), Variant::gcgru);
  STUNet m(c, path4());
  EXPECT_TRUE(m.plain());
  EXPECT_EQ(m.partition().num_levels(), 0u);
  EXPECT_THROW(m.laplacian(1), std::out_of_range);
}

TEST(Build, CoarseLaplacianOnPath) {
  STUNet m(tiny_config(), path4());
  EXPECT_EQ(m.partition().num_levels(), 1u);
  EXPECT_EQ(m.laplacian(1).normalized.rows(), 2);
}

TEST(Build, SameSeedSameParameters) {
  auto c = tiny_config();
  c.unpool = UnpoolMode::weighted_deconv;
  STUNet a(c, path4()), b(c, path4());
  ASSERT_EQ(a.parameters().size(), b.parameters().size());
  std::set<std::string> names;
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    EXPECT_EQ(a.parameters()[i].first, b.parameters()[i].first);
    EXPECT_TRUE(names.insert(a.parameters()[i].first).second) << "duplicate name";
    const auto& x = a.parameters()[i].second;
    const auto& y = b.parameters()[i].second;
    EXPECT_EQ(std::memcmp(x.values().data(), y.values().data(), x.size() * sizeof(double)), 0);
  }
  c.seed = 6;
  STUNet d(c, path4());
  EXPECT_NE(d.encoder(0).w_z.theta[0], a.encoder(0).w_z.theta[0]);
}

TEST(Forward, ShapeContract) {
  auto g = random_connected_graph(9, 3);
  std::mt19937_64 rng(1);
  for (std::size_t p : {0, 1, 2}) {
    for (std::size_t s : {1, 2, 3}) {
      for (auto mode : {UnpoolMode::direct_copy, UnpoolMode::ordered_deconv,
                        UnpoolMode::weighted_deconv}) {
        auto c = tiny_config();
        c.pool_level = p;
        c.dilation = s;
        c.unpool = mode;
        c.hidden = {4, 3, 2};
        c.input_dim = 2;
        c.output_dim = 2;
        c.horizon = 3;
        c.input_length = 4;
        STUNet m(c, g);
        auto out = m.forward(random_sequence(4, {9, 2}, rng));
        ASSERT_EQ(out.size(), 3u);
        for (const auto& y : out) EXPECT_EQ(y.shape(), (Shape{9, 2}));
        auto batched = m.forward(random_sequence(4, {9, 5, 2}, rng));
        for (const auto& y : batched) EXPECT_EQ(y.shape(), (Shape{9, 5, 2}));
      }
    }
  }
}

TEST(Forward, EdgelessGraphRuns) {
  auto c = tiny_config();
  STUNet m(c, Graph(Eigen::MatrixXd::Zero(4, 4)));
  std::mt19937_64 rng(2);
  auto out = m.forward(random_sequence(3, {4, 1}, rng));
  EXPECT_EQ(out[1].shape(), (Shape{4, 1}));
}

TEST(Forward, RejectsMismatchedInputs) {
  STUNet m(tiny_config(), path4());
  std::mt19937_64 rng(3);
  EXPECT_THROW(m.forward(random_sequence(2, {4, 1}, rng)), DimensionError);
  EXPECT_THROW(m.forward(random_sequence(3, {5, 1}, rng)), DimensionError);
  EXPECT_THROW(m.forward(random_sequence(3, {4, 2}, rng)), DimensionError);
}

TEST(Forward, ZeroReadoutGivesZeroPredictions) {
  STUNet m(tiny_config(), path4());
  Tensor theta = m.readout().theta;
  for (auto& v : theta.mutable_values()) v = 0.0;
  std::mt19937_64 rng(4);
  for (const auto& y : m.forward(random_sequence(3, {4, 1}, rng)))
    for (double v : y.values()) EXPECT_EQ(v, 0.0);
}

// p = 0, s = 1 against a stack assembled directly from recurrent pieces.
TEST(Forward, PlainVariantMatchesStackedGCGRU) {
  auto g = random_connected_graph(6, 4);
  auto c = variant(tiny_config(), Variant::gcgru);
  c.hidden = {4, 3, 5};
  c.horizon = 3;
  STUNet m(c, g);

  auto lap = normalized_laplacian(g);
  std::vector<GCGRUWeights> layers;
  const std::size_t ins[] = {1, 4, 3};
  for (std::size_t l = 0; l < 3; ++l) {
    const std::string name = "encoder" + std::to_string(l);
    layers.push_back(GCGRUWeights::create(2, ins[l], c.hidden[l], true, c.seed, name));
  }
  auto dec = GCGRUWeights::create(2, 1, 5, true, c.seed, "decoder");
  auto readout = make_cheb_kernel(2, 1, 5, parameter_seed(c.seed, "readout.theta"));
  Tensor bias({1}, 0.0);

  std::mt19937_64 rng(7);
  auto xs = random_sequence(3, {6, 2, 1}, rng);
  Sequence h = xs;
  for (const auto& w : layers) h = dilated_layer_forward(w, lap, h, 1);
  auto expected = decode(dec, lap, h.back(), Tensor(Shape{6, 2, 1}, 0.0),
                         [&](const Tensor& s) { return add_bias(cheb_conv(readout, lap, s), bias); },
                         {3});
  EXPECT_TRUE(identical(m.forward(xs), expected));
}

TEST(Loss, Examples) {
  auto t = Tensor::matrix({{1, 2}, {3, 4}});
  EXPECT_EQ(forecast_loss({t}, {t}).item(), 0.0);
  EXPECT_DOUBLE_EQ(forecast_loss({add_scalar(t, 1.0)}, {t}).item(), 1.0);
  EXPECT_DOUBLE_EQ(forecast_loss({add_scalar(t, -2.0), add_scalar(t, 2.0)}, {t, t}).item(), 3.0);
  EXPECT_THROW(forecast_loss({t}, {Tensor::matrix({{1, 2}})}), DimensionError);
  EXPECT_THROW(forecast_loss({t}, {t, t}), DimensionError);
}

TEST(Loss, ZeroOnlyWhenEqual) {
  auto t = Tensor::matrix({{1, 2}});
  EXPECT_GT(forecast_loss({Tensor::matrix({{1, 2.0000001}})}, {t}).item(), 0.0);
}

class EndToEndGradient : public ::testing::TestWithParam<UnpoolMode> {};

TEST_P(EndToEndGradient, TinySTUNet) {
  auto c = tiny_config();
  c.unpool = GetParam();
  auto g = Graph::from_edges(4, {{0, 1, 1.0}, {1, 2, 0.6}, {2, 3, 1.4}, {0, 3, 0.3}});
  STUNet m(c, g);
  std::mt19937_64 rng(11);
  // Nonzero biases so every parameter carries a generic gradient.
  for (const auto& [name, t] : m.parameters()) {
    if (name.find(".b_") != std::string::npos || name == "readout.bias") {
      Tensor b = t;
      for (auto& v : b.mutable_values()) v = std::uniform_real_distribution<double>(-0.3, 0.3)(rng);
    }
  }
  auto xs = random_sequence(3, {4, 2, 1}, rng, true);
  auto ys = random_sequence(2, {4, 2, 1}, rng);
  auto params = m.parameter_tensors();
  params.insert(params.end(), xs.begin(), xs.end());
  auto loss = [&] { return forecast_loss(m.forward(xs), ys); };
  EXPECT_LT(max_gradient_error(loss, params), 1e-3);
}

INSTANTIATE_TEST_SUITE_P(Unpool, EndToEndGradient,
                         ::testing::Values(UnpoolMode::direct_copy, UnpoolMode::ordered_deconv,
                                           UnpoolMode::weighted_deconv));

TEST(Checkpoint, RoundTripRestoresForward) {
  auto c = tiny_config();
  c.unpool = UnpoolMode::ordered_deconv;
  STUNet a(c, path4());
  const auto path = temp_file("roundtrip.ckpt");
  save_checkpoint(path, a, {{"norm_mean", "1.5"}});
  auto ck = load_checkpoint(path);
  EXPECT_EQ(ck.config.to_pairs(), c.to_pairs());
  ASSERT_NE(ck.find("norm_mean"), nullptr);
  EXPECT_EQ(*ck.find("norm_mean"), "1.5");
  EXPECT_EQ(ck.find("missing"), nullptr);

  auto other = c;
  other.seed = 99;
  STUNet b(other, path4());
  b.load_parameters(ck.parameters);
  std::mt19937_64 rng(5);
  auto xs = random_sequence(3, {4, 1}, rng);
  EXPECT_TRUE(identical(a.forward(xs), b.forward(xs)));

  // Saving the restored model reproduces the file byte for byte.
  const auto again = temp_file("roundtrip2.ckpt");
  save_checkpoint(again, b, {{"norm_mean", "1.5"}});
  std::ifstream f1(path, std::ios::binary), f2(again, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), {}), s2((std::istreambuf_iterator<char>(f2)), {});
  // Only the seed line differs.
  EXPECT_EQ(s1.size(), s2.size() - 1);
  std::filesystem::remove(path);
  std::filesystem::remove(again);
}

TEST(Checkpoint, RejectsCorruptOrMismatched) {
  STUNet a(tiny_config(), path4());
  const auto path = temp_file("bad.ckpt");
  save_checkpoint(path, a);
  std::string bytes;
  {
    std::ifstream f(path, std::ios::binary);
    bytes.assign((std::istreambuf_iterator<char>(f)), {});
  }
  auto write = [&](const std::string& b) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(b.data(), static_cast<std::streamsize>(b.size()));
  };
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  write(bad_magic);
  EXPECT_THROW(load_checkpoint(path), LoadError);
  auto bad_version = bytes;
  bad_version[4] = 2;
  write(bad_version);
  EXPECT_THROW(load_checkpoint(path), LoadError);
  write(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_checkpoint(path), LoadError);
  write(bytes);
  auto ck = load_checkpoint(path);
  auto wider = tiny_config();
  wider.hidden = {4, 4, 4};
  STUNet b(wider, path4());
  EXPECT_THROW(b.load_parameters(ck.parameters), LoadError);
  STUNet plain(variant(tiny_config(), Variant::gcgru), path4());
  EXPECT_THROW(plain.load_parameters(ck.parameters), LoadError);
  EXPECT_THROW(load_checkpoint(temp_file("does_not_exist")), LoadError);
  std::filesystem::remove(path);
}
