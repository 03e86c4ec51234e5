#pragma once

#include "goose/core/message.hpp"
#include "goose/core/rules.hpp"
#include "goose/core/signature.hpp"
#include "goose/ingest/codec.hpp"
#include "goose/ingest/csv.hpp"
#include "goose/ingest/hash.hpp"
#include "goose/ingest/pcap.hpp"
#include "goose/quality/quality.hpp"
#include "goose/aatm/config.hpp"
#include "goose/aatm/generator.hpp"
#include "goose/detect/metrics.hpp"
#include "goose/llm/detector.hpp"
