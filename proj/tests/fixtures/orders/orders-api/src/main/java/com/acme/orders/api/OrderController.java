package com.acme.orders.api;

import java.util.concurrent.BlockingQueue;

/**
 * REST entry point that accepts orders and hands them off asynchronously.
 */
public class OrderController {
    private final BlockingQueue<Object> outbox;

    public OrderController(BlockingQueue<Object> outbox) {
        this.outbox = outbox;
    }

    public String createOrder(OrderDTO request) {
        outbox.offer(request.toModel());
        return request.id;
    }
}
