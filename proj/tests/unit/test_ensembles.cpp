#include <doctest.h>

#include "cohaudit/ensembles.hpp"
#include "cohaudit/matrix_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace cohaudit;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cohaudit_test_" + name);
}

}  // namespace

TEST_CASE("generated ensembles have unit-norm columns and are reproducible") {
  for (Ensemble e : {Ensemble::gaussian, Ensemble::bernoulli, Ensemble::partial_fourier}) {
    CAPTURE(to_string(e));
    const auto a = generate({e, 32, 64, 11});
    const auto b = generate({e, 32, 64, 11});
    const auto c = generate({e, 32, 64, 12});
    CHECK(a.rows() == 32);
    CHECK(a.cols() == 64);
    CHECK(a.max_norm_deviation() < 1e-12);
    CHECK(a.data() == b.data());
    CHECK(a.data() != c.data());
    CHECK(a.ensemble() == e);
    CHECK(a.seed() == std::optional<std::uint64_t>(11));
  }
}

TEST_CASE("bernoulli entries are ±1/√n") {
  const auto m = generate_raw({Ensemble::bernoulli, 16, 20, 3});
  for (Index i = 0; i < m.size(); ++i) CHECK(std::abs(m(i)) == doctest::Approx(0.25));
}

TEST_CASE("raw gaussian entries have variance 1/n") {
  const auto m = generate_raw({Ensemble::gaussian, 50, 2000, 4});
  const double var = m.array().square().mean();
  CHECK(var == doctest::Approx(1.0 / 50).epsilon(0.02));
  CHECK(std::abs(m.mean()) < 0.002);
}

TEST_CASE("real fourier basis is orthonormal") {
  for (Index n : {1, 2, 7, 8, 33, 128}) {
    CAPTURE(n);
    const MatrixXd f = real_fourier_basis(n);
    CHECK((f * f.transpose() - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("partial fourier rows are distinct rows of the basis") {
  const MatrixXd m = generate_raw({Ensemble::partial_fourier, 10, 40, 2});
  CHECK((m * m.transpose() - MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK_THROWS_AS(generate({Ensemble::partial_fourier, 41, 40, 2}), UnsupportedError);
}

TEST_CASE("invalid dimensions") {
  CHECK_THROWS_AS(generate({Ensemble::gaussian, 0, 4, 1}), DimensionError);
  CHECK_THROWS_AS(generate({Ensemble::gaussian, 4, 0, 1}), DimensionError);
  CHECK_THROWS_AS(ensemble_from_string("cauchy"), DomainError);
}

TEST_CASE("normalize_columns is idempotent and rejects zero columns") {
  MatrixXd raw(3, 3);
  raw << 3, 0, 1, 4, 2, 1, 0, 0, 1;
  const MatrixXd once = normalize_columns(raw);
  CHECK(once.col(0).isApprox(VectorXd((VectorXd(3) << 0.6, 0.8, 0.0).finished())));
  CHECK(normalize_columns(once) == once);
  raw.col(1).setZero();
  try {
    normalize_columns(raw);
    FAIL("expected DegenerateColumnError");
  } catch (const DegenerateColumnError& e) {
    CHECK(e.column() == 1);
  }
}

TEST_CASE("normalize_columns works in single precision") {
  Eigen::MatrixXf raw = Eigen::MatrixXf::Random(5, 4);
  const Eigen::MatrixXf n = normalize_columns(raw);
  for (Index j = 0; j < 4; ++j) CHECK(n.col(j).norm() == doctest::Approx(1.0f).epsilon(1e-6));
}

TEST_CASE("measurement matrix validation") {
  CHECK_THROWS_AS(MeasurementMatrix{MatrixXd(0, 3)}, DimensionError);
  MatrixXd bad = MatrixXd::Ones(2, 2);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(MeasurementMatrix{bad}, DomainError);
  const MeasurementMatrix empty(MatrixXd(4, 0));
  CHECK(empty.cols() == 0);
  CHECK(empty.max_norm_deviation() == 0.0);
}

TEST_CASE("matrix files round-trip exactly") {
  const auto m = generate({Ensemble::gaussian, 7, 9, 5});
  for (auto fmt : {MatrixFormat::csv, MatrixFormat::binary}) {
    const auto path = temp_path(fmt == MatrixFormat::csv ? "rt.csv" : "rt.bin");
    save_matrix(m, path, fmt);
    const auto back = load_matrix(path, fmt);
    CHECK(back.data() == m.data());
    std::filesystem::remove(path);
  }
  CHECK(format_from_path("a/b.csv") == MatrixFormat::csv);
  CHECK(format_from_path("a/b.camx") == MatrixFormat::binary);
}

TEST_CASE("malformed matrix files are parse errors") {
  const auto path = temp_path("bad.csv");
  auto write = [&](const std::string& text) {
    std::ofstream(path) << text;
  };
  write("2,2\n1,2\n3\n");
  CHECK_THROWS_AS(load_matrix(path, MatrixFormat::csv), ParseError);
  write("2,x\n1,2\n3,4\n");
  CHECK_THROWS_AS(load_matrix(path, MatrixFormat::csv), ParseError);
  write("1,2\n1,nan\n");
  CHECK_THROWS_AS(load_matrix(path, MatrixFormat::csv), ParseError);
  write("CAMX");
  CHECK_THROWS_AS(load_matrix(path, MatrixFormat::binary), ParseError);
  write("2,2\n1 2\n3 4\n");
  CHECK(load_matrix(path, MatrixFormat::csv).data()(1, 0) == 3.0);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_matrix(temp_path("missing.csv"), MatrixFormat::csv), ParseError);
}

TEST_CASE("csv header and value count") {
  const auto path = temp_path("hdr.csv");
  std::ofstream(path) << "2,3\n1,0,0\n0,1,0\n";
  const auto m = load_matrix(path, MatrixFormat::csv);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.data().col(0) == Eigen::Vector2d(1, 0));
  std::ofstream(path) << "2,3\n1,0,0\n0,1\n";
  CHECK_THROWS_AS(load_matrix(path, MatrixFormat::csv), ParseError);
  std::filesystem::remove(path);
}
