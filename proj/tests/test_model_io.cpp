#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "superstate/envs.hpp"
#include "superstate/model_io.hpp"

using namespace superstate;

TEST_CASE("serialize/parse round-trips the bundled environments exactly") {
    for (const PomdpModel& m : {envs::customer_retail(), envs::two_state_toy(), envs::tmaze(3, 2.0, 0.9, 5)}) {
        const std::string text = serialize_model(m);
        const PomdpModel back = parse_model(text);
        CHECK(back.n_states == m.n_states);
        CHECK(back.transition == m.transition);
        CHECK(back.obs_kernel == m.obs_kernel);
        CHECK(back.reward == m.reward);
        CHECK(back.init_dist == m.init_dist);
        CHECK(back.gamma == m.gamma);
        CHECK(back.state_labels == m.state_labels);
        CHECK(serialize_model(back) == text);
    }
}

TEST_CASE("hash is stable and content-sensitive") {
    const PomdpModel m = envs::customer_retail();
    const std::string h1 = model_content_hash(m);
    CHECK(h1 == model_content_hash(envs::customer_retail()));
    PomdpModel other = m;
    other.rew(0, 0) = 0.5;
    other.finalize();
    CHECK(model_content_hash(other) != h1);
}

TEST_CASE("parser rejects invariant violations with source context") {
    PomdpModel m = envs::two_state_toy();
    m.trans(0, 0, 0) = 0.7;  // row now sums to 0.9
    const std::string text = serialize_model(m);
    CHECK_THROWS_WITH_AS(parse_model(text, "broken.model"),
                         doctest::Contains("broken.model"), ModelIoError);
    try {
        parse_model(text, "broken.model");
    } catch (const ModelIoError& e) {
        CHECK(std::string(e.what()).find("s=0") != std::string::npos);
    }
}

TEST_CASE("parser rejects malformed json with context") {
    CHECK_THROWS_AS(parse_model("{ not json", "bad.model"), ModelIoError);
    CHECK_THROWS_AS(parse_model(R"({"n_states": 2})", "incomplete.model"), ModelIoError);
}

TEST_CASE("manifest headers are stripped before parsing") {
    const PomdpModel m = envs::two_state_toy();
    const std::string with_header = "# manifest line one\n# another\n" + serialize_model(m);
    const PomdpModel back = parse_model(with_header);
    CHECK(back.transition == m.transition);
}

TEST_CASE("load/save round-trip through a file") {
    const PomdpModel m = envs::customer_retail();
    const std::string path = "test_model_io_tmp.model";
    save_model(m, path);
    const PomdpModel back = load_model(path);
    CHECK(back.transition == m.transition);
    CHECK(model_content_hash(back) == model_content_hash(m));
    std::remove(path.c_str());
}
