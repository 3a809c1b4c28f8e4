#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "core/errors.hpp"
#include "core/rop.hpp"

using namespace pacta;

namespace {

Right right_of(const std::string& holder, std::set<std::string> ops,
               const std::string& counterparty) {
    Right r;
    r.holder = holder;
    r.operations = std::move(ops);
    r.counterparty = counterparty;
    return r;
}

// Independent membership oracle: scans every right by hand.
bool rights_oracle(const RopSet& rop, const std::string& op) {
    for (const auto& r : rop.rights) {
        for (const auto& o : r.operations) {
            if (o == op) return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("matches_rights finds covered operations") {
    RopSet rop{"alice", {}, {}, {}};
    add_right(rop, right_of("alice", {"POrequest"}, "bob"));

    CHECK(matches_rights(rop, "POrequest"));
    CHECK(matches_rights(rop, "POrequest") == rights_oracle(rop, "POrequest"));

    RopSet empty{"alice", {}, {}, {}};
    CHECK_FALSE(matches_rights(empty, "POrequest"));

    RopSet other{"alice", {}, {}, {}};
    add_right(other, right_of("alice", {"makeClaim"}, "bob"));
    CHECK_FALSE(matches_rights(other, "POrequest"));
    CHECK(matches_rights(other, "POrequest") == rights_oracle(other, "POrequest"));
}

TEST_CASE("matches_rights honours expiry when a time is supplied") {
    RopSet rop{"alice", {}, {}, {}};
    Right r = right_of("alice", {"POrequest"}, "bob");
    r.expiry = 1000;
    add_right(rop, std::move(r));

    CHECK(matches_rights(rop, "POrequest", 1000));  // valid through expiry
    CHECK_FALSE(matches_rights(rop, "POrequest", 1001));
    CHECK(matches_rights(rop, "POrequest"));  // no time: expiry ignored
}

TEST_CASE("remove_right removes operations and drops emptied rights") {
    RopSet rop{"alice", {}, {}, {}};
    add_right(rop, right_of("alice", {"POrequest"}, "bob"));
    remove_right(rop, "POrequest", "bob");
    CHECK(rop.rights.empty());

    RopSet empty{"alice", {}, {}, {}};
    CHECK_THROWS_AS(remove_right(empty, "POrequest", "bob"), DomainError);
    try {
        remove_right(empty, "POrequest", "bob");
    } catch (const DomainError& e) {
        CHECK(e.code() == ErrorCode::NoSuchRight);
    }

    // Set-difference oracle: removing one op from a two-op right leaves the
    // other in place.
    RopSet wide{"alice", {}, {}, {}};
    add_right(wide, right_of("alice", {"POrequest", "makeClaim"}, "bob"));
    remove_right(wide, "POrequest", "bob");
    REQUIRE(wide.rights.size() == 1);
    CHECK(wide.rights[0].operations == std::set<std::string>{"makeClaim"});

    // Counterparty mismatch leaves the right untouched.
    RopSet mismatched{"alice", {}, {}, {}};
    add_right(mismatched, right_of("alice", {"POrequest"}, "bob"));
    CHECK_THROWS_AS(remove_right(mismatched, "POrequest", "valia"), DomainError);
    CHECK(mismatched.rights.size() == 1);
}

TEST_CASE("add_right is idempotent and rejects prohibited operations") {
    RopSet rop{"alice", {}, {}, {}};
    add_right(rop, right_of("alice", {"POrequest"}, "bob"));
    add_right(rop, right_of("alice", {"POrequest"}, "bob"));
    CHECK(rop.rights.size() == 1);

    add_prohibition(rop, Prohibition{"alice", {"refuseClaim"}});
    CHECK_THROWS_AS(add_right(rop, right_of("alice", {"refuseClaim"}, "bob")), DomainError);
    try {
        add_right(rop, right_of("alice", {"refuseClaim"}, "bob"));
    } catch (const DomainError& e) {
        CHECK(e.code() == ErrorCode::ConflictingDeonticState);
    }
}

TEST_CASE("add_prohibition rejects operations covered by active rights") {
    RopSet rop{"alice", {}, {}, {}};
    add_right(rop, right_of("alice", {"POrequest"}, "bob"));
    CHECK_THROWS_AS(add_prohibition(rop, Prohibition{"alice", {"POrequest"}}), DomainError);
}

TEST_CASE("add_obligation appends pending obligations once") {
    RopSet rop{"bob", {}, {}, {}};
    add_obligation(rop, "ReactToPOReq", {"POconfirm", "POreject"}, "alice", 600'000, 1'000);
    REQUIRE(rop.obligations.size() == 1);
    const Obligation& o = rop.obligations[0];
    CHECK(o.status == ObligationStatus::Pending);
    CHECK(o.due_at() == 601'000);
    CHECK(o.obligor == "bob");

    CHECK_THROWS_AS(add_obligation(rop, "ReactToPOReq", {"POconfirm"}, "alice", 1000, 2000),
                    DomainError);
    try {
        add_obligation(rop, "ReactToPOReq", {"POconfirm"}, "alice", 1000, 2000);
    } catch (const DomainError& e) {
        CHECK(e.code() == ErrorCode::DuplicateObligation);
    }

    CHECK_THROWS_AS(add_obligation(rop, "Empty", {}, "alice", 1000, 0), DomainError);
    CHECK_THROWS_AS(add_obligation(rop, "NoDeadline", {"POconfirm"}, "alice", 0, 0), DomainError);
}

TEST_CASE("fulfill_obligation discharges any alternative within the deadline") {
    RopSet rop{"bob", {}, {}, {}};
    add_obligation(rop, "ReactToPOReq", {"POconfirm", "POreject"}, "alice", 600'000, 0);

    SUBCASE("in time") {
        auto discharged = fulfill_obligation(rop, "POconfirm", 500'000);
        CHECK(discharged == std::vector<std::string>{"ReactToPOReq"});
        CHECK(rop.obligations[0].status == ObligationStatus::Fulfilled);
    }
    SUBCASE("at the deadline boundary, inclusive") {
        auto discharged = fulfill_obligation(rop, "POreject", 600'000);
        CHECK(discharged.size() == 1);
        CHECK(rop.obligations[0].status == ObligationStatus::Fulfilled);
    }
    SUBCASE("too late: stays pending until the sweep") {
        auto discharged = fulfill_obligation(rop, "POconfirm", 600'001);
        CHECK(discharged.empty());
        CHECK(rop.obligations[0].status == ObligationStatus::Pending);
    }
    SUBCASE("unrelated operation") {
        CHECK(fulfill_obligation(rop, "payClaim", 1).empty());
    }
    SUBCASE("empty rop") {
        RopSet empty{"bob", {}, {}, {}};
        CHECK(fulfill_obligation(empty, "POconfirm", 1).empty());
    }
}

TEST_CASE("expired_obligations marks violations strictly past the deadline") {
    RopSet rop{"bob", {}, {}, {}};
    add_obligation(rop, "ReactToPOReq", {"POconfirm"}, "alice", 600'000, 0);

    CHECK(expired_obligations(rop, 600'000).empty());  // inclusive boundary
    CHECK(rop.obligations[0].status == ObligationStatus::Pending);

    auto expired = expired_obligations(rop, 600'001);
    REQUIRE(expired.size() == 1);
    CHECK(expired[0].name == "ReactToPOReq");
    CHECK(expired[0].status == ObligationStatus::Violated);
    CHECK(rop.obligations[0].status == ObligationStatus::Violated);

    // Terminal: the sweep never returns it again.
    CHECK(expired_obligations(rop, 999'999'999).empty());

    RopSet empty{"bob", {}, {}, {}};
    CHECK(expired_obligations(empty, 1).empty());
}

TEST_CASE("fulfilled obligations never expire later") {
    RopSet rop{"bob", {}, {}, {}};
    add_obligation(rop, "ReactToPOReq", {"POconfirm"}, "alice", 600'000, 0);
    fulfill_obligation(rop, "POconfirm", 300'000);
    for (Timestamp now : {600'000, 600'001, 10'000'000}) {
        CHECK(expired_obligations(rop, now).empty());
    }
    CHECK(rop.obligations[0].status == ObligationStatus::Fulfilled);
}

TEST_CASE("remove_right then matches_rights is false when all counterparties matched") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> ops = {"POrequest", "makeClaim", "payClaim"};
    for (int round = 0; round < 200; ++round) {
        RopSet rop{"alice", {}, {}, {}};
        for (int i = 0; i < 4; ++i) {
            std::set<std::string> subset;
            for (const auto& op : ops) {
                if (rng() % 2) subset.insert(op);
            }
            if (subset.empty()) subset.insert(ops[rng() % ops.size()]);
            add_right(rop, right_of("alice", subset, "bob"));
        }
        const std::string& op = ops[rng() % ops.size()];
        try {
            remove_right(rop, op, "bob");
        } catch (const DomainError&) {
        }
        CHECK_FALSE(matches_rights(rop, op));
    }
}

// The deontic invariant must survive arbitrary well-formed operation
// sequences: no operation may be both actively granted and prohibited.
TEST_CASE("right/prohibition disjointness holds under random operation sequences") {
    std::mt19937_64 rng(42);
    const std::vector<std::string> ops = {"a", "b", "c", "d"};
    for (int round = 0; round < 100; ++round) {
        RopSet rop{"p", {}, {}, {}};
        for (int step = 0; step < 50; ++step) {
            int choice = static_cast<int>(rng() % 3);
            const std::string& op = ops[rng() % ops.size()];
            try {
                if (choice == 0) {
                    add_right(rop, right_of("p", {op}, "q"));
                } else if (choice == 1) {
                    add_prohibition(rop, Prohibition{"p", {op}});
                } else {
                    remove_right(rop, op, "q");
                }
            } catch (const DomainError&) {
                // rejected operations must leave the set unchanged; the
                // invariant check below covers both cases
            }
            for (const auto& o : ops) {
                bool conflicted = matches_rights(rop, o) && is_prohibited(rop, o);
                CHECK_FALSE(conflicted);
            }
        }
    }
}

TEST_CASE("operations are deterministic value transformations") {
    RopSet a{"alice", {}, {}, {}};
    RopSet b{"alice", {}, {}, {}};
    for (RopSet* rop : {&a, &b}) {
        add_right(*rop, right_of("alice", {"POrequest"}, "bob"));
        add_obligation(*rop, "O", {"payClaim"}, "bob", 1000, 5);
        fulfill_obligation(*rop, "payClaim", 500);
    }
    CHECK(a == b);
}
