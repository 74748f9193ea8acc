#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "branchmc/csv.hpp"

using namespace branchmc;

TEST_CASE("empty table writes only the header", "[csv]") {
    CsvTable table;
    table.columns = {"beta", "mean"};
    std::ostringstream os;
    write_csv(table, os);
    CHECK(os.str() == "beta,mean\r\n");
}

TEST_CASE("floats print with 17 significant digits", "[csv]") {
    CsvTable table;
    table.columns = {"v"};
    table.rows = {{0.1}, {1.0}, {12345.678901234567}};
    std::ostringstream os;
    write_csv(table, os);
    const std::string text = os.str();
    CHECK(text.find("0.10000000000000001") != std::string::npos);
    CHECK(text.find("12345.678901234567") != std::string::npos);
}

TEST_CASE("beta sweep schema", "[csv]") {
    CsvTable table;
    table.columns = {"beta", "mean", "stderr", "n", "fd_f_beta", "fd_f"};
    table.rows = {{1.0, 0.5, 0.01, 1000, 0.49, 0.51}};
    std::ostringstream os;
    write_csv(table, os);
    CHECK(os.str().rfind("beta,mean,stderr,n,fd_f_beta,fd_f\r\n", 0) == 0);
}

TEST_CASE("row arity is validated", "[csv]") {
    CsvTable table;
    table.columns = {"a", "b"};
    table.rows = {{1.0}};
    std::ostringstream os;
    CHECK_THROWS_AS(write_csv(table, os), argument_error);
}

TEST_CASE("io errors carry the path", "[csv]") {
    CsvTable table;
    table.columns = {"a"};
    try {
        emit_csv(table, "/nonexistent_dir_zzz/out.csv");
        FAIL("expected io_error");
    } catch (const io_error& e) {
        CHECK(std::string(e.what()).find("/nonexistent_dir_zzz/out.csv") != std::string::npos);
    }
}

TEST_CASE("emit_csv round-trips through a file", "[csv]") {
    CsvTable table;
    table.columns = {"x"};
    table.rows = {{0.25}};
    const std::string path = "test_csv_roundtrip.csv";
    emit_csv(table, path);
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == "x\r\n0.25\r\n");
    std::remove(path.c_str());
}
